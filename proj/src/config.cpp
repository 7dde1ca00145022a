// Copyright 2026 The Cornerkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "cornerkit/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "cornerkit/error.hpp"

namespace cornerkit {
namespace {

using nlohmann::json;

template <typename T>
void read_if(const json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

json edges_to_json(const std::vector<double>& edges) {
  json out = json::array();
  for (double e : edges) {
    if (std::isinf(e)) {
      out.push_back("inf");
    } else {
      out.push_back(e);
    }
  }
  return out;
}

std::vector<double> edges_from_json(const json& doc) {
  std::vector<double> out;
  for (const json& e : doc) {
    if (e.is_string()) {
      if (e.get<std::string>() != "inf") throw ConfigError("distance edge must be a number or \"inf\"");
      out.push_back(std::numeric_limits<double>::infinity());
    } else {
      out.push_back(e.get<double>());
    }
  }
  return out;
}

}  // namespace

Dataset parse_dataset(const std::string& name) {
  if (name == "once") return Dataset::kOnce;
  if (name == "waymo") return Dataset::kWaymo;
  throw ConfigError("unknown dataset '" + name + "' (expected once or waymo)");
}

int Config::class_id(const std::string& name) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Config default_config(Dataset dataset) {
  Config c;
  if (dataset == Dataset::kOnce) {
    c.classes = {"Car", "Bus", "Truck", "Pedestrian", "Cyclist"};
    c.grid.range = {-75.2, -75.2, -5.0, 75.2, 75.2, 3.0};
    c.grid.voxel_size = {0.1, 0.1, 0.2};
    c.eval = EvalConfig::once();
    c.sample_counts = kDefaultSampleCounts;
  } else {
    c.classes = {"Vehicle", "Pedestrian", "Cyclist"};
    c.grid.range = {-75.2, -75.2, -2.0, 75.2, 75.2, 4.0};
    c.grid.voxel_size = {0.1, 0.1, 0.15};
    c.eval = EvalConfig::waymo();
    c.sample_counts = {0, 0, 0};
  }
  c.target.num_classes = static_cast<int>(c.classes.size());
  return c;
}

Config config_from_json(const json& doc, Dataset dataset) {
  Config c = default_config(dataset);
  try {
    if (doc.contains("dataset")) c = default_config(parse_dataset(doc.at("dataset").get<std::string>()));
    if (doc.contains("grid")) {
      const json& g = doc.at("grid");
      read_if(g, "range", c.grid.range);
      read_if(g, "voxel_size", c.grid.voxel_size);
      read_if(g, "max_points_per_voxel", c.grid.max_points_per_voxel);
      read_if(g, "out_factor", c.grid.out_factor);
      read_if(g, "max_voxels", c.grid.max_voxels);
    }
    read_if(doc, "classes", c.classes);
    read_if(doc, "attr_dim", c.attr_dim);
    c.target.num_classes = static_cast<int>(c.classes.size());
    if (doc.contains("targets")) {
      const json& t = doc.at("targets");
      read_if(t, "num_corners", c.target.num_corners);
      read_if(t, "radius", c.target.radius);
      read_if(t, "skip_degenerate", c.target.skip_degenerate);
    }
    if (doc.contains("loss")) {
      const json& l = doc.at("loss");
      read_if(l, "gamma", c.loss.gamma);
      read_if(l, "lambda", c.loss.lambda);
      read_if(l, "alpha", c.loss.alpha);
      read_if(l, "beta", c.loss.beta);
    }
    if (doc.contains("eval")) {
      const json& e = doc.at("eval");
      read_if(e, "classes", c.eval.class_names);
      read_if(e, "iou_thresholds", c.eval.iou_thresholds);
      read_if(e, "class_merge", c.eval.class_merge);
      read_if(e, "orientation_gate", c.eval.orientation_gate);
      if (e.contains("recall")) {
        const json& r = e.at("recall");
        read_if(r, "count", c.eval.recall.count);
        read_if(r, "start", c.eval.recall.start);
        read_if(r, "step", c.eval.recall.step);
      }
      if (e.contains("distance_edges")) c.eval.distance_edges = edges_from_json(e.at("distance_edges"));
      if (e.contains("difficulty")) {
        const std::string d = e.at("difficulty").get<std::string>();
        if (d == "none") {
          c.eval.difficulty = DifficultyMode::kNone;
        } else if (d == "waymo-levels") {
          c.eval.difficulty = DifficultyMode::kWaymoLevels;
        } else {
          throw ConfigError("unknown difficulty mode '" + d + "'");
        }
      }
      if (e.contains("iou_mode")) {
        const std::string m = e.at("iou_mode").get<std::string>();
        if (m == "3d") {
          c.eval.iou_mode = IouMode::k3d;
        } else if (m == "bev") {
          c.eval.iou_mode = IouMode::kBev;
        } else {
          throw ConfigError("unknown iou_mode '" + m + "'");
        }
      }
    }
    if (doc.contains("augmentation")) {
      const json& a = doc.at("augmentation");
      read_if(a, "sample_counts", c.sample_counts);
      read_if(a, "flip_probability", c.augment.flip_probability);
      read_if(a, "max_rotation", c.augment.max_rotation);
      read_if(a, "min_scale", c.augment.min_scale);
      read_if(a, "max_scale", c.augment.max_scale);
    }
    if (doc.contains("decode")) {
      const json& d = doc.at("decode");
      read_if(d, "max_peaks", c.decode.max_peaks);
      read_if(d, "score_threshold", c.decode.score_threshold);
      read_if(d, "nms_iou", c.decode.nms_iou);
      read_if(d, "class_agnostic_nms", c.decode.class_agnostic_nms);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

json config_to_json(const Config& c) {
  json doc;
  doc["grid"] = {{"range", c.grid.range},
                 {"voxel_size", c.grid.voxel_size},
                 {"max_points_per_voxel", c.grid.max_points_per_voxel},
                 {"out_factor", c.grid.out_factor},
                 {"max_voxels", c.grid.max_voxels}};
  doc["classes"] = c.classes;
  doc["attr_dim"] = c.attr_dim;
  doc["targets"] = {{"num_corners", c.target.num_corners},
                    {"radius", c.target.radius},
                    {"skip_degenerate", c.target.skip_degenerate}};
  doc["loss"] = {{"gamma", c.loss.gamma},
                 {"lambda", c.loss.lambda},
                 {"alpha", c.loss.alpha},
                 {"beta", c.loss.beta}};
  doc["eval"] = {
      {"classes", c.eval.class_names},
      {"iou_thresholds", c.eval.iou_thresholds},
      {"class_merge", c.eval.class_merge},
      {"orientation_gate", c.eval.orientation_gate},
      {"recall",
       {{"count", c.eval.recall.count}, {"start", c.eval.recall.start}, {"step", c.eval.recall.step}}},
      {"distance_edges", edges_to_json(c.eval.distance_edges)},
      {"difficulty", c.eval.difficulty == DifficultyMode::kWaymoLevels ? "waymo-levels" : "none"},
      {"iou_mode", c.eval.iou_mode == IouMode::k3d ? "3d" : "bev"}};
  doc["augmentation"] = {{"sample_counts", c.sample_counts},
                         {"flip_probability", c.augment.flip_probability},
                         {"max_rotation", c.augment.max_rotation},
                         {"min_scale", c.augment.min_scale},
                         {"max_scale", c.augment.max_scale}};
  doc["decode"] = {{"max_peaks", c.decode.max_peaks},
                   {"score_threshold", c.decode.score_threshold},
                   {"nms_iou", c.decode.nms_iou},
                   {"class_agnostic_nms", c.decode.class_agnostic_nms}};
  return doc;
}

Config load_config(const std::filesystem::path& path, Dataset dataset) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(FormatError::Kind::kSyntax, e.byte, std::string("config: ") + e.what());
  }
  return config_from_json(doc, dataset);
}

void validate(const Config& c) {
  validate(c.grid);
  if (c.classes.empty()) throw ConfigError("class table is empty");
  if (c.attr_dim < 0) throw ConfigError("attr_dim must be >= 0");
  validate(c.target);
  if (c.target.num_classes != static_cast<int>(c.classes.size())) {
    throw ConfigError("target class count does not match the class table");
  }
  validate(c.eval);
  if (!c.eval.class_merge.empty() && c.eval.class_merge.size() != c.classes.size()) {
    throw ConfigError("class_merge must have one entry per configured class");
  }
  if (c.eval.class_merge.empty() && c.eval.class_names.size() != c.classes.size()) {
    throw ConfigError("without class_merge the evaluation classes must match the class table");
  }
  if (c.sample_counts.size() != c.classes.size()) {
    throw ConfigError("sample_counts must have one entry per class");
  }
  for (int n : c.sample_counts) {
    if (n < 0) throw ConfigError("sample counts must be >= 0");
  }
  if (!(c.loss.gamma >= 0.0 && c.loss.lambda >= 0.0)) throw ConfigError("loss weights must be >= 0");
  if (!(c.augment.min_scale > 0.0 && c.augment.max_scale >= c.augment.min_scale)) {
    throw ConfigError("augmentation scale range is invalid");
  }
}

json report_to_json(const EvalReport& report) {
  auto classes_json = [&](const std::vector<ClassMetrics>& classes) {
    json arr = json::array();
    for (const ClassMetrics& c : classes) {
      json buckets = json::object();
      for (std::size_t b = 0; b < c.bucket_ap.size() && b < report.bucket_labels.size(); ++b) {
        const json ap = c.bucket_gt[b] > 0 ? json(c.bucket_ap[b]) : json(nullptr);
        buckets[report.bucket_labels[b]] = {{"ap", ap}, {"num_gt", c.bucket_gt[b]}};
      }
      arr.push_back({{"name", c.name},
                     {"ap", c.ap},
                     {"aph", c.aph},
                     {"defined", c.defined},
                     {"num_gt", c.num_gt},
                     {"tp", c.tp},
                     {"fp", c.fp},
                     {"fn", c.fn},
                     {"buckets", buckets}});
    }
    return arr;
  };
  json doc = {{"classes", classes_json(report.classes)},
              {"map", report.map},
              {"maph", report.maph},
              {"buckets", report.bucket_labels}};
  json levels = json::array();
  for (const LevelMetrics& l : report.levels) {
    levels.push_back({{"name", l.name},
                      {"classes", classes_json(l.classes)},
                      {"map", l.map},
                      {"maph", l.maph}});
  }
  doc["levels"] = levels;
  return doc;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(12) << "class" << std::right << std::setw(10) << "overall";
  for (const std::string& b : report.bucket_labels) os << std::setw(10) << b;
  os << std::setw(8) << "gt" << std::setw(8) << "tp" << std::setw(8) << "fp" << "\n";
  for (const ClassMetrics& c : report.classes) {
    os << std::left << std::setw(12) << c.name << std::right << std::setw(10) << 100.0 * c.ap;
    for (std::size_t b = 0; b < c.bucket_ap.size(); ++b) {
      if (b < c.bucket_gt.size() && c.bucket_gt[b] == 0) {
        os << std::setw(10) << "-";
      } else {
        os << std::setw(10) << 100.0 * c.bucket_ap[b];
      }
    }
    os << std::setw(8) << c.num_gt << std::setw(8) << c.tp << std::setw(8) << c.fp
       << (c.defined ? "" : "  (no ground truth)") << "\n";
  }
  os << std::left << std::setw(12) << "mAP" << std::right << std::setw(10) << 100.0 * report.map
     << "\n";
  for (const LevelMetrics& l : report.levels) {
    os << "\n" << l.name << "\n";
    os << std::left << std::setw(12) << "class" << std::right << std::setw(10) << "AP"
       << std::setw(10) << "APH" << "\n";
    for (const ClassMetrics& c : l.classes) {
      os << std::left << std::setw(12) << c.name << std::right << std::setw(10) << 100.0 * c.ap
         << std::setw(10) << 100.0 * c.aph << "\n";
    }
    os << std::left << std::setw(12) << "mean" << std::right << std::setw(10) << 100.0 * l.map
       << std::setw(10) << 100.0 * l.maph << "\n";
  }
  return os.str();
}

}  // namespace cornerkit
