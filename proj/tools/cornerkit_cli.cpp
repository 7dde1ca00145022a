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
// cornerkit command-line driver.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 data error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cornerkit/augmentation.hpp"
#include "cornerkit/config.hpp"
#include "cornerkit/corner_assigner.hpp"
#include "cornerkit/decoder.hpp"
#include "cornerkit/error.hpp"
#include "cornerkit/frame_io.hpp"
#include "cornerkit/metrics.hpp"
#include "cornerkit/parallel.hpp"
#include "cornerkit/random.hpp"
#include "cornerkit/scene_synth.hpp"
#include "cornerkit/target_builder.hpp"
#include "cornerkit/tensor_io.hpp"
#include "cornerkit/voxelizer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cornerkit;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct GlobalOptions {
  std::string config_path;
  std::string dataset = "once";
  std::uint64_t seed = 0;
  int jobs = 1;
  std::optional<int> corners;
};

// Where a set of frames comes from: one cloud file, or a directory of
// <frame_id>.bin files keyed by the annotation file.
struct FrameOptions {
  std::string cloud;
  std::string clouds_dir;
  std::string annotations;
  std::vector<std::string> frame_ids;
};

struct FrameRef {
  std::string id;
  fs::path cloud;
};

Config resolve_config(const GlobalOptions& g) {
  const Dataset dataset = parse_dataset(g.dataset);
  Config c = g.config_path.empty() ? default_config(dataset) : load_config(g.config_path, dataset);
  if (g.corners) {
    c.target.num_corners = *g.corners;
    validate(c);
  }
  return c;
}

void add_frame_options(CLI::App* cmd, FrameOptions& f) {
  cmd->add_option("--cloud", f.cloud, "Single point cloud (.bin)");
  cmd->add_option("--clouds", f.clouds_dir, "Directory of <frame_id>.bin clouds");
  cmd->add_option("--annotations", f.annotations, "Annotation JSON lines");
  cmd->add_option("--frame", f.frame_ids, "Frame id(s) to process");
}

std::vector<FrameRef> resolve_frames(const FrameOptions& f, const Config& config) {
  if (f.cloud.empty() == f.clouds_dir.empty()) {
    throw CLI::ValidationError("frames", "give exactly one of --cloud or --clouds");
  }
  if (!f.cloud.empty()) {
    if (f.frame_ids.size() > 1) throw CLI::ValidationError("--frame", "one frame id with --cloud");
    const std::string id = f.frame_ids.empty() ? fs::path(f.cloud).stem().string() : f.frame_ids[0];
    return {{id, f.cloud}};
  }
  std::vector<std::string> ids = f.frame_ids;
  if (ids.empty()) {
    if (f.annotations.empty()) throw CLI::ValidationError("--annotations", "needed with --clouds");
    ids = group_by_frame(read_records(f.annotations, config.classes)).frame_ids;
  }
  std::vector<FrameRef> out;
  for (const std::string& id : ids) out.push_back({id, fs::path(f.clouds_dir) / (id + ".bin")});
  return out;
}

std::vector<Frame> load_frames(const FrameOptions& f, const Config& config, int jobs) {
  const std::vector<FrameRef> refs = resolve_frames(f, config);
  FrameGroups groups;
  if (!f.annotations.empty()) groups = group_by_frame(read_records(f.annotations, config.classes));
  std::vector<Frame> frames(refs.size());
  parallel_for(refs.size(), jobs, [&](std::size_t i) {
    Frame& fr = frames[i];
    fr.id = refs[i].id;
    fr.cloud = read_cloud(refs[i].cloud, config.attr_dim);
    const int g = groups.index_of(fr.id);
    if (g < 0) return;
    bool counts = true;
    for (const BoxRecord& r : groups.records[g]) {
      fr.boxes.push_back(r.box);
      if (r.num_points) {
        fr.point_counts.push_back(*r.num_points);
      } else {
        counts = false;
      }
    }
    if (!counts) fr.point_counts.clear();
  });
  return frames;
}

fs::path prepare_dir(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

DType parse_dtype(const std::string& name) {
  if (name == "f32") return DType::kF32;
  if (name == "f64") return DType::kF64;
  throw CLI::ValidationError("--dtype", "expected f32 or f64");
}

void write_json(const std::string& path, const json& doc) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

json point_json(const Point2& p) { return json::array({p.x, p.y}); }

// ---------------------------------------------------------------------------

int run_voxelize(const GlobalOptions& g, const FrameOptions& f, const std::string& out_dir,
                 const std::string& dtype) {
  const Config config = resolve_config(g);
  const DType dt = parse_dtype(dtype);
  const std::vector<Frame> frames = load_frames(f, config, g.jobs);
  const fs::path dir = prepare_dir(out_dir);
  std::vector<std::string> lines(frames.size());
  parallel_for(frames.size(), g.jobs, [&](std::size_t i) {
    const VoxelSet vs = voxelize(frames[i].cloud, config.grid, derive_seed(g.seed, i));
    Tensor points{{static_cast<std::uint32_t>(vs.size()), static_cast<std::uint32_t>(vs.max_points),
                   static_cast<std::uint32_t>(vs.point_width)},
                  dt, vs.points};
    Tensor coords{{static_cast<std::uint32_t>(vs.size()), 3}, DType::kF64, {}};
    Tensor counts{{static_cast<std::uint32_t>(vs.size())}, DType::kF64, {}};
    for (std::size_t v = 0; v < vs.size(); ++v) {
      coords.values.insert(coords.values.end(),
                           {double(vs.indices[v].ix), double(vs.indices[v].iy), double(vs.indices[v].iz)});
      counts.values.push_back(vs.counts[v]);
    }
    const std::string& id = frames[i].id;
    write_tensor(dir / (id + ".voxels.tns"), points);
    write_tensor(dir / (id + ".coords.tns"), coords);
    write_tensor(dir / (id + ".counts.tns"), counts);
    lines[i] = id + ": " + std::to_string(frames[i].cloud.size()) + " points -> " +
               std::to_string(vs.size()) + " voxels";
  });
  for (const std::string& l : lines) std::cout << l << '\n';
  return 0;
}

int run_assign(const GlobalOptions& g, const FrameOptions& f, const std::string& out) {
  const Config config = resolve_config(g);
  const std::vector<Frame> frames = load_frames(f, config, g.jobs);
  std::vector<json> docs(frames.size());
  parallel_for(frames.size(), g.jobs, [&](std::size_t i) {
    const Frame& fr = frames[i];
    const std::vector<CornerSelection> sel = assign_frame(fr.boxes, fr.cloud);
    json boxes = json::array();
    for (std::size_t b = 0; b < sel.size(); ++b) {
      const CornerSelection& s = sel[b];
      json corners = json::object();
      for (int t = 0; t < kNumCornerTypes; ++t) {
        const auto type = static_cast<CornerType>(t);
        corners[corner_type_name(type)] = {{"index", s.corner_index(type)},
                                           {"xy", point_json(s.corner(type))}};
      }
      boxes.push_back({{"box", b},
                       {"class", config.classes.at(fr.boxes[b].class_id)},
                       {"histogram", s.histogram.q},
                       {"interior_points", s.interior_points},
                       {"max_quadrant", s.max_quadrant},
                       {"degenerate", s.degenerate},
                       {"corners", corners}});
    }
    docs[i] = {{"frame_id", fr.id}, {"boxes", boxes}};
  });
  write_json(out, json(docs));
  return 0;
}

int run_targets(const GlobalOptions& g, const FrameOptions& f, const std::string& out_dir,
                const std::string& dtype) {
  const Config config = resolve_config(g);
  const DType dt = parse_dtype(dtype);
  const std::vector<Frame> frames = load_frames(f, config, g.jobs);
  const fs::path dir = prepare_dir(out_dir);
  std::vector<std::string> lines(frames.size());
  parallel_for(frames.size(), g.jobs, [&](std::size_t i) {
    const Frame& fr = frames[i];
    const TargetBundle t = build_targets(fr.boxes, fr.cloud, config.grid, config.target);
    const fs::path base = dir / fr.id;
    write_tensor(base.string() + ".corner_heatmap.tns", to_tensor(t.corners.heatmap, dt));
    write_tensor(base.string() + ".corner_offsets.tns", to_tensor(t.corners.offsets, dt));
    write_tensor(base.string() + ".corner_mask.tns", to_tensor(t.corners.mask));
    write_tensor(base.string() + ".center_heatmap.tns", to_tensor(t.centers.heatmap, dt));
    write_tensor(base.string() + ".center_regression.tns", to_tensor(t.centers.regression, dt));
    write_tensor(base.string() + ".center_mask.tns", to_tensor(t.centers.mask));
    lines[i] = fr.id + ": " + std::to_string(fr.boxes.size()) + " boxes, " +
               std::to_string(t.centers.skipped_out_of_range) + " out of range, " +
               std::to_string(t.corners.collisions + t.centers.collisions) + " collisions";
  });
  for (const std::string& l : lines) std::cout << l << '\n';
  return 0;
}

int run_gtdb(const GlobalOptions& g, const FrameOptions& f, const std::string& out_dir) {
  const Config config = resolve_config(g);
  const std::vector<Frame> frames = load_frames(f, config, g.jobs);
  const GtDatabase db = build_gt_database(frames, static_cast<int>(config.classes.size()));
  save_gt_database(out_dir, db, config.classes);
  for (std::size_t c = 0; c < db.by_class.size(); ++c) {
    std::cout << config.classes[c] << ": " << db.by_class[c].size() << '\n';
  }
  std::cout << "skipped empty: " << db.skipped_empty << '\n';
  return 0;
}

int run_augment(const GlobalOptions& g, const FrameOptions& f, const std::string& db_dir,
                const std::string& out_dir, bool no_global) {
  const Config config = resolve_config(g);
  const std::vector<Frame> frames = load_frames(f, config, g.jobs);
  std::optional<GtDatabase> db;
  if (!db_dir.empty()) db = load_gt_database(db_dir, config.classes);
  const fs::path dir = prepare_dir(out_dir);
  std::vector<Frame> results(frames.size());
  std::vector<std::string> lines(frames.size());
  parallel_for(frames.size(), g.jobs, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(g.seed, i);
    Frame fr = frames[i];
    int pasted = 0;
    if (db) {
      PasteResult p = sample_and_paste(fr, *db, config.sample_counts, seed);
      for (int n : p.pasted_per_class) pasted += n;
      fr = std::move(p.frame);
    }
    if (!no_global) fr = global_augment(fr, derive_seed(seed, 1), config.augment);
    write_cloud(dir / (fr.id + ".bin"), fr.cloud);
    lines[i] = fr.id + ": " + std::to_string(pasted) + " pasted, " + std::to_string(fr.boxes.size()) +
               " boxes";
    results[i] = std::move(fr);
  });
  std::vector<BoxRecord> records;
  for (const Frame& fr : results) {
    const std::vector<BoxRecord> r = frame_records(fr);
    records.insert(records.end(), r.begin(), r.end());
  }
  write_records(dir / "annotations.jsonl", records, config.classes);
  for (const std::string& l : lines) std::cout << l << '\n';
  return 0;
}

int run_decode(const GlobalOptions& g, const std::string& heatmap, const std::string& regression,
               const std::string& targets_dir, std::vector<std::string> frame_ids,
               const std::string& out) {
  const Config config = resolve_config(g);
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> jobs;
  if (!targets_dir.empty()) {
    if (frame_ids.empty()) {
      const std::string suffix = ".center_heatmap.tns";
      for (const auto& entry : fs::directory_iterator(targets_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
          frame_ids.push_back(name.substr(0, name.size() - suffix.size()));
        }
      }
      std::sort(frame_ids.begin(), frame_ids.end());
    }
    for (const std::string& id : frame_ids) {
      const fs::path base = fs::path(targets_dir) / id;
      jobs.push_back({id, {base.string() + ".center_heatmap.tns", base.string() + ".center_regression.tns"}});
    }
  } else {
    if (heatmap.empty() || regression.empty()) {
      throw CLI::ValidationError("decode", "give --targets or both --heatmap and --regression");
    }
    jobs.push_back({frame_ids.empty() ? fs::path(heatmap).stem().string() : frame_ids[0],
                    {heatmap, regression}});
  }
  std::vector<std::vector<BoxRecord>> per_frame(jobs.size());
  std::vector<int> dropped(jobs.size(), 0);
  parallel_for(jobs.size(), g.jobs, [&](std::size_t i) {
    const Grid hm = grid_from_tensor(read_tensor(jobs[i].second.first));
    const Grid reg = grid_from_tensor(read_tensor(jobs[i].second.second));
    const std::vector<Peak> peaks = extract_peaks(hm, config.decode.max_peaks, config.decode.score_threshold);
    const DecodeResult d = decode_boxes(peaks, reg, config.grid);
    const std::vector<Detection> kept =
        bev_nms(d.detections, config.decode.nms_iou, config.decode.class_agnostic_nms);
    per_frame[i] = detection_records(jobs[i].first, kept);
    dropped[i] = d.dropped_non_finite;
  });
  std::vector<BoxRecord> records;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    records.insert(records.end(), per_frame[i].begin(), per_frame[i].end());
    std::cerr << jobs[i].first << ": " << per_frame[i].size() << " detections";
    if (dropped[i] > 0) std::cerr << " (" << dropped[i] << " non-finite dropped)";
    std::cerr << '\n';
  }
  const std::string text = format_records(records, config.classes);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw DataError("cannot write " + out);
    os << text;
  }
  return 0;
}

int run_eval(const GlobalOptions& g, const std::string& det_path, const std::string& gt_path,
             const std::string& json_out) {
  const Config config = resolve_config(g);
  const FrameGroups gts = group_by_frame(read_records(gt_path, config.classes));
  const FrameGroups dets = group_by_frame(read_records(det_path, config.classes));
  std::vector<std::string> ids = gts.frame_ids;
  for (const std::string& id : dets.frame_ids) {
    if (gts.index_of(id) < 0) ids.push_back(id);
  }
  FrameDetections d(ids.size());
  FrameGroundTruths t(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (const int k = gts.index_of(ids[i]); k >= 0) t[i] = to_ground_truths(gts.records[k]);
    if (const int k = dets.index_of(ids[i]); k >= 0) d[i] = to_detections(dets.records[k]);
  }
  const EvalReport report = evaluate(d, t, config.eval, g.jobs);
  std::cout << format_report(report);
  if (!json_out.empty()) write_json(json_out, report_to_json(report));
  return 0;
}

int run_synth(const GlobalOptions& g, std::vector<std::string> names, const std::string& out_dir,
              bool list) {
  if (list) {
    for (const std::string& n : fixture_names()) std::cout << n << '\n';
    return 0;
  }
  const Config config = resolve_config(g);
  if (names.empty()) names = fixture_names();
  const fs::path dir = prepare_dir(out_dir);
  std::vector<Frame> frames(names.size());
  parallel_for(names.size(), g.jobs, [&](std::size_t i) { frames[i] = make_fixture(names[i]).frame; });
  std::vector<BoxRecord> records;
  for (const Frame& fr : frames) {
    if (fr.cloud.attr_dim() != config.attr_dim) {
      throw ConfigError("fixture clouds carry attr_dim " + std::to_string(fr.cloud.attr_dim()));
    }
    write_cloud(dir / (fr.id + ".bin"), fr.cloud);
    const std::vector<BoxRecord> r = frame_records(fr);
    records.insert(records.end(), r.begin(), r.end());
    std::cout << fr.id << ": " << fr.cloud.size() << " points, " << fr.boxes.size() << " boxes\n";
  }
  write_records(dir / "annotations.jsonl", records, config.classes);
  return 0;
}

int run_dump_heatmap(const std::string& tensor_path, int channel, const std::string& out,
                     bool normalize) {
  const Grid grid = grid_from_tensor(read_tensor(tensor_path));
  if (channel < 0 || channel >= grid.channels()) {
    throw DataError("channel " + std::to_string(channel) + " outside [0, " +
                    std::to_string(grid.channels()) + ")");
  }
  double hi = 1.0;
  if (normalize) {
    hi = 0.0;
    for (int r = 0; r < grid.rows(); ++r) {
      for (int c = 0; c < grid.cols(); ++c) hi = std::max(hi, grid.at(r, c, channel));
    }
    if (hi <= 0.0) hi = 1.0;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw DataError("cannot write " + out);
  os << "P5\n" << grid.cols() << ' ' << grid.rows() << "\n255\n";
  // Row 0 of the grid is the minimum y; images run top-down, so flip.
  for (int r = grid.rows() - 1; r >= 0; --r) {
    for (int c = 0; c < grid.cols(); ++c) {
      const double v = std::clamp(grid.at(r, c, channel) / hi, 0.0, 1.0);
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cornerkit: voxelization, corner targets, decoding and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--dataset", g.dataset, "Default preset")->check(CLI::IsMember({"once", "waymo"}));
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--corners", g.corners, "Auxiliary corner count")->check(CLI::Range(1, 4));

  FrameOptions frames;
  std::string out, out_dir, dtype = "f32", db_dir, heatmap, regression, targets_dir, det_path,
                            gt_path, json_out, tensor_path;
  std::vector<std::string> names, frame_ids;
  bool no_global = false, list = false, normalize = false;
  int channel = 0;

  auto* voxelize_cmd = app.add_subcommand("voxelize", "Group points into voxels");
  add_frame_options(voxelize_cmd, frames);
  voxelize_cmd->add_option("--out", out_dir, "Output directory")->required();
  voxelize_cmd->add_option("--dtype", dtype, "Point tensor dtype (f32|f64)");

  auto* assign_cmd = app.add_subcommand("assign", "Corner selection per box as JSON");
  add_frame_options(assign_cmd, frames);
  assign_cmd->add_option("--out", out, "Output JSON file (default stdout)");

  auto* targets_cmd = app.add_subcommand("targets", "Heatmap, offset and mask targets as TNS1");
  add_frame_options(targets_cmd, frames);
  targets_cmd->add_option("--out", out_dir, "Output directory")->required();
  targets_cmd->add_option("--dtype", dtype, "Float tensor dtype (f32|f64)");

  auto* gtdb_cmd = app.add_subcommand("gtdb", "Build the object database used for pasting");
  add_frame_options(gtdb_cmd, frames);
  gtdb_cmd->add_option("--out", out_dir, "Database directory")->required();

  auto* augment_cmd = app.add_subcommand("augment", "Object pasting and global transforms");
  add_frame_options(augment_cmd, frames);
  augment_cmd->add_option("--db", db_dir, "Object database directory (enables pasting)");
  augment_cmd->add_option("--out", out_dir, "Output directory")->required();
  augment_cmd->add_flag("--no-global", no_global, "Skip flips, rotation and scaling");

  auto* decode_cmd = app.add_subcommand("decode", "Center heatmap + regression to boxes");
  decode_cmd->add_option("--targets", targets_dir, "Directory written by 'targets'");
  decode_cmd->add_option("--heatmap", heatmap, "Center heatmap tensor");
  decode_cmd->add_option("--regression", regression, "Center regression tensor");
  decode_cmd->add_option("--frame", frame_ids, "Frame id(s)");
  decode_cmd->add_option("--out", out, "Detections JSON lines (default stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "Average precision report");
  eval_cmd->add_option("--detections", det_path, "Detections JSON lines")->required();
  eval_cmd->add_option("--annotations", gt_path, "Ground-truth JSON lines")->required();
  eval_cmd->add_option("--json", json_out, "Also write the report as JSON");

  auto* synth_cmd = app.add_subcommand("synth", "Ray-cast synthetic fixture scenes");
  synth_cmd->add_option("--fixture", names, "Fixture name(s); default all");
  synth_cmd->add_option("--out", out_dir, "Output directory");
  synth_cmd->add_flag("--list", list, "List fixture names");

  auto* dump_cmd = app.add_subcommand("dump-heatmap", "Write one heatmap channel as PGM");
  dump_cmd->add_option("--tensor", tensor_path, "Heatmap tensor")->required();
  dump_cmd->add_option("--channel", channel, "Channel index");
  dump_cmd->add_option("--out", out, "Output .pgm")->required();
  dump_cmd->add_flag("--normalize", normalize, "Scale by the channel maximum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*voxelize_cmd) return run_voxelize(g, frames, out_dir, dtype);
    if (*assign_cmd) return run_assign(g, frames, out);
    if (*targets_cmd) return run_targets(g, frames, out_dir, dtype);
    if (*gtdb_cmd) return run_gtdb(g, frames, out_dir);
    if (*augment_cmd) return run_augment(g, frames, db_dir, out_dir, no_global);
    if (*decode_cmd) return run_decode(g, heatmap, regression, targets_dir, frame_ids, out);
    if (*eval_cmd) return run_eval(g, det_path, gt_path, json_out);
    if (*synth_cmd) {
      if (!list && out_dir.empty()) throw CLI::ValidationError("--out", "required unless --list");
      return run_synth(g, names, out_dir, list);
    }
    if (*dump_cmd) return run_dump_heatmap(tensor_path, channel, out, normalize);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
