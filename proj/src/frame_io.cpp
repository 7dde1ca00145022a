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
#include "cornerkit/frame_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "cornerkit/error.hpp"
#include "cornerkit/tensor_io.hpp"
#include "json.hpp"

namespace cornerkit {
namespace {

using nlohmann::json;


std::uint32_t load_u32_le(const std::byte* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, std::byte* p) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::byte>((v >> (8 * i)) & 0xffu);
}

double field(const json& obj, const char* key, std::uint64_t offset) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw FormatError(FormatError::Kind::kSyntax, offset,
                      std::string("missing or non-numeric field '") + key + "'");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw FormatError(FormatError::Kind::kSyntax, offset, std::string("non-finite '") + key + "'");
  }
  return v;
}

std::string string_field(const json& obj, const char* key, std::uint64_t offset) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw FormatError(FormatError::Kind::kSyntax, offset,
                      std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

int class_index(const std::vector<std::string>& classes, const std::string& name) {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

PointCloud decode_cloud(std::span<const std::byte> bytes, int attr_dim) {
  if (attr_dim < 0) throw ConfigError("attr_dim must be >= 0");
  const std::size_t record = 4u * static_cast<std::size_t>(3 + attr_dim);
  if (bytes.size() % record != 0) {
    throw FormatError(FormatError::Kind::kTruncated, bytes.size() - bytes.size() % record,
                      "cloud size " + std::to_string(bytes.size()) +
                          " is not a multiple of the record size " + std::to_string(record));
  }
  std::vector<double> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(load_u32_le(bytes.data() + 4 * i));
  }
  return PointCloud(attr_dim, std::move(values));
}

std::vector<std::byte> encode_cloud(const PointCloud& cloud) {
  const std::vector<double>& v = cloud.values();
  std::vector<std::byte> out(4 * v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    store_u32_le(std::bit_cast<std::uint32_t>(static_cast<float>(v[i])), out.data() + 4 * i);
  }
  return out;
}

PointCloud read_cloud(const std::filesystem::path& path, int attr_dim) {
  return decode_cloud(read_file_bytes(path), attr_dim);
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file_bytes(path, encode_cloud(cloud));
}

std::vector<BoxRecord> parse_records(const std::string& text,
                                     const std::vector<std::string>& classes) {
  std::vector<BoxRecord> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    const std::uint64_t offset = pos;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(FormatError::Kind::kSyntax, offset + (e.byte > 0 ? e.byte - 1 : 0),
                        "malformed JSON line");
    }
    if (!obj.is_object()) throw FormatError(FormatError::Kind::kSyntax, offset, "line is not an object");

    BoxRecord r;
    r.frame_id = string_field(obj, "frame_id", offset);
    const std::string name = string_field(obj, "class", offset);
    r.box.class_id = class_index(classes, name);
    if (r.box.class_id < 0) {
      throw DataError("unknown class name '" + name + "' (at byte offset " +
                      std::to_string(offset) + ")");
    }
    r.box.center = {field(obj, "cx", offset), field(obj, "cy", offset), field(obj, "cz", offset)};
    r.box.dims = {field(obj, "w", offset), field(obj, "l", offset), field(obj, "h", offset)};
    r.box.yaw = field(obj, "yaw", offset);
    if (obj.contains("score")) r.score = field(obj, "score", offset);
    if (obj.contains("num_points")) {
      const json& n = obj.at("num_points");
      if (!n.is_number_integer() || n.get<long long>() < 0) {
        throw FormatError(FormatError::Kind::kSyntax, offset, "num_points must be a count");
      }
      r.num_points = n.get<int>();
    }
    try {
      validate_box(r.box);
    } catch (const ConfigError& e) {
      throw DataError(std::string(e.what()) + " (at byte offset " + std::to_string(offset) + ")");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_records(const std::vector<BoxRecord>& records,
                           const std::vector<std::string>& classes) {
  std::string out;
  for (const BoxRecord& r : records) {
    if (r.box.class_id < 0 || r.box.class_id >= static_cast<int>(classes.size())) {
      throw DataError("class id " + std::to_string(r.box.class_id) + " outside the class table");
    }
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    obj["frame_id"] = r.frame_id;
    obj["class"] = classes[r.box.class_id];
    obj["cx"] = r.box.center.x;
    obj["cy"] = r.box.center.y;
    obj["cz"] = r.box.center.z;
    obj["w"] = r.box.dims.w;
    obj["l"] = r.box.dims.l;
    obj["h"] = r.box.dims.h;
    obj["yaw"] = r.box.yaw;
    if (r.score) obj["score"] = *r.score;
    if (r.num_points) obj["num_points"] = *r.num_points;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<BoxRecord> read_records(const std::filesystem::path& path,
                                    const std::vector<std::string>& classes) {
  return parse_records(read_text(path), classes);
}

void write_records(const std::filesystem::path& path, const std::vector<BoxRecord>& records,
                   const std::vector<std::string>& classes) {
  const std::string text = format_records(records, classes);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

int FrameGroups::index_of(const std::string& frame_id) const {
  for (std::size_t i = 0; i < frame_ids.size(); ++i) {
    if (frame_ids[i] == frame_id) return static_cast<int>(i);
  }
  return -1;
}

FrameGroups group_by_frame(const std::vector<BoxRecord>& records) {
  FrameGroups g;
  std::unordered_map<std::string, std::size_t> slot;
  for (const BoxRecord& r : records) {
    auto [it, inserted] = slot.try_emplace(r.frame_id, g.frame_ids.size());
    if (inserted) {
      g.frame_ids.push_back(r.frame_id);
      g.records.emplace_back();
    }
    g.records[it->second].push_back(r);
  }
  return g;
}

std::vector<BoxRecord> detection_records(const std::string& frame_id,
                                         std::span<const Detection> dets) {
  std::vector<BoxRecord> out;
  out.reserve(dets.size());
  for (const Detection& d : dets) out.push_back({frame_id, d.box, d.score, std::nullopt});
  return out;
}

std::vector<Detection> to_detections(std::span<const BoxRecord> records) {
  std::vector<Detection> out;
  out.reserve(records.size());
  for (const BoxRecord& r : records) {
    if (!r.score) throw DataError("detection for frame '" + r.frame_id + "' has no score");
    out.push_back({r.box, *r.score});
  }
  return out;
}

std::vector<GroundTruth> to_ground_truths(std::span<const BoxRecord> records) {
  std::vector<GroundTruth> out;
  out.reserve(records.size());
  for (const BoxRecord& r : records) out.push_back({r.box, r.num_points});
  return out;
}

Frame read_frame(const std::filesystem::path& cloud_path,
                 const std::filesystem::path& annotation_path, const std::string& frame_id,
                 const std::vector<std::string>& classes, int attr_dim) {
  Frame f;
  f.id = frame_id;
  f.cloud = read_cloud(cloud_path, attr_dim);
  if (annotation_path.empty()) return f;
  bool all_counts = true;
  std::vector<int> counts;
  for (const BoxRecord& r : read_records(annotation_path, classes)) {
    if (r.frame_id != frame_id) continue;
    f.boxes.push_back(r.box);
    if (r.num_points) {
      counts.push_back(*r.num_points);
    } else {
      all_counts = false;
    }
  }
  if (all_counts && !f.boxes.empty()) f.point_counts = std::move(counts);
  return f;
}

std::vector<BoxRecord> frame_records(const Frame& frame) {
  const bool counts = frame.point_counts.size() == frame.boxes.size();
  std::vector<BoxRecord> out;
  for (std::size_t i = 0; i < frame.boxes.size(); ++i) {
    BoxRecord r{frame.id, frame.boxes[i], std::nullopt, std::nullopt};
    if (counts) r.num_points = frame.point_counts[i];
    out.push_back(std::move(r));
  }
  return out;
}

void write_frame(const std::filesystem::path& cloud_path,
                 const std::filesystem::path& annotation_path, const Frame& frame,
                 const std::vector<std::string>& classes) {
  write_cloud(cloud_path, frame.cloud);
  write_records(annotation_path, frame_records(frame), classes);
}

void save_gt_database(const std::filesystem::path& dir, const GtDatabase& db,
                      const std::vector<std::string>& classes) {
  if (db.by_class.size() > classes.size()) throw DataError("database has more classes than the table");
  std::filesystem::create_directories(dir);
  json entries = json::array();
  int serial = 0;
  for (std::size_t c = 0; c < db.by_class.size(); ++c) {
    for (const GtDatabaseEntry& e : db.by_class[c]) {
      const std::string file = "entry_" + std::to_string(serial++) + ".tns";
      Tensor t;
      t.dims = {static_cast<std::uint32_t>(e.local_points.size()),
                static_cast<std::uint32_t>(e.local_points.stride())};
      t.dtype = DType::kF64;
      t.values = e.local_points.values();
      write_tensor(dir / file, t);
      entries.push_back({{"class", classes[c]},
                         {"cx", e.box.center.x},
                         {"cy", e.box.center.y},
                         {"cz", e.box.center.z},
                         {"w", e.box.dims.w},
                         {"l", e.box.dims.l},
                         {"h", e.box.dims.h},
                         {"yaw", e.box.yaw},
                         {"source_frame", e.source_frame},
                         {"points", file}});
    }
  }
  const json manifest = {{"attr_dim", db.attr_dim},
                         {"num_classes", db.by_class.size()},
                         {"skipped_empty", db.skipped_empty},
                         {"entries", entries}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(1) << '\n';
}

GtDatabase load_gt_database(const std::filesystem::path& dir,
                            const std::vector<std::string>& classes) {
  const std::filesystem::path manifest_path = dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_text(manifest_path));
  } catch (const json::parse_error& e) {
    throw FormatError(FormatError::Kind::kSyntax, e.byte, "malformed database manifest");
  }
  GtDatabase db;
  try {
    db.attr_dim = manifest.at("attr_dim").get<int>();
    db.skipped_empty = manifest.value("skipped_empty", 0);
    db.by_class.resize(manifest.at("num_classes").get<std::size_t>());
    for (const json& e : manifest.at("entries")) {
      const int c = class_index(classes, e.at("class").get<std::string>());
      if (c < 0 || c >= static_cast<int>(db.by_class.size())) {
        throw DataError("database entry has unknown class '" + e.at("class").get<std::string>() + "'");
      }
      GtDatabaseEntry entry;
      entry.box.class_id = c;
      entry.box.center = {e.at("cx").get<double>(), e.at("cy").get<double>(),
                          e.at("cz").get<double>()};
      entry.box.dims = {e.at("w").get<double>(), e.at("l").get<double>(), e.at("h").get<double>()};
      entry.box.yaw = e.at("yaw").get<double>();
      entry.source_frame = e.at("source_frame").get<std::string>();
      const Tensor t = read_tensor(dir / e.at("points").get<std::string>());
      if (t.dims.size() != 2 || t.dims[1] != static_cast<std::uint32_t>(3 + db.attr_dim)) {
        throw DataError("database points tensor has the wrong shape");
      }
      entry.local_points = PointCloud(db.attr_dim, t.values);
      db.by_class[c].push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Kind::kSyntax, 0, std::string("database manifest: ") + e.what());
  }
  return db;
}

}  // namespace cornerkit
