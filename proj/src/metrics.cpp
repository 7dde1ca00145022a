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
#include "cornerkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cornerkit/error.hpp"
#include "cornerkit/parallel.hpp"

namespace cornerkit {
namespace {

constexpr double kClipEps = 1e-9;

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Point2 line_intersection(const Point2& p, const Point2& q, const Point2& a, const Point2& b) {
  // Intersection of segment pq with the infinite line ab.
  const double d1 = cross(a, b, p);
  const double d2 = cross(a, b, q);
  const double t = d1 / (d1 - d2);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

double volume(const Box3D& b) { return b.dims.w * b.dims.l * b.dims.h; }

int eval_class(int raw, const EvalConfig& config) {
  if (config.class_merge.empty()) return raw;
  if (raw < 0 || raw >= static_cast<int>(config.class_merge.size())) return -1;
  return config.class_merge[raw];
}

int bucket_of(double distance, const std::vector<double>& edges) {
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (distance >= edges[i] && distance < edges[i + 1]) return static_cast<int>(i);
  }
  return -1;
}

double bev_distance(const Box3D& b) { return std::hypot(b.center.x, b.center.y); }

struct PreparedFrame {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
};

PreparedFrame prepare(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                      const EvalConfig& config) {
  PreparedFrame out;
  for (Detection d : dets) {
    d.box.class_id = eval_class(d.box.class_id, config);
    if (d.box.class_id >= 0) out.dets.push_back(d);
  }
  for (GroundTruth g : gts) {
    g.box.class_id = eval_class(g.box.class_id, config);
    if (g.box.class_id >= 0) out.gts.push_back(g);
  }
  return out;
}

struct Accumulated {
  std::size_t frame = 0;
  int det = 0;
  double score = 0.0;
  MatchLabel label = MatchLabel::kFalsePositive;
  double heading_weight = 0.0;
  int bucket = -1;  // matched GT bucket for TPs, own bucket for FPs
};

// Class-level metrics given per-frame matches and a GT ignore predicate.
template <typename Ignored>
std::vector<ClassMetrics> summarize(const std::vector<PreparedFrame>& frames,
                                    const std::vector<FrameMatch>& matches,
                                    const EvalConfig& config, Ignored&& ignored) {
  const int num_classes = static_cast<int>(config.class_names.size());
  const int num_buckets = static_cast<int>(config.distance_edges.size()) - 1;

  std::vector<ClassMetrics> out(num_classes);
  std::vector<std::vector<Accumulated>> ranked(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    out[c].name = config.class_names[c];
    out[c].bucket_gt.assign(std::max(num_buckets, 0), 0);
  }

  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& frame = frames[f];
    for (std::size_t g = 0; g < frame.gts.size(); ++g) {
      if (ignored(f, g)) continue;
      const int c = frame.gts[g].box.class_id;
      ++out[c].num_gt;
      const int b = bucket_of(bev_distance(frame.gts[g].box), config.distance_edges);
      if (b >= 0) ++out[c].bucket_gt[b];
      if (!matches[f].gt_matched[g]) ++out[c].fn;
    }
    for (std::size_t d = 0; d < frame.dets.size(); ++d) {
      const DetectionMatch& m = matches[f].detections[d];
      if (m.label == MatchLabel::kIgnored) continue;
      Accumulated a;
      a.frame = f;
      a.det = static_cast<int>(d);
      a.score = frame.dets[d].score;
      a.label = m.label;
      if (m.label == MatchLabel::kTruePositive) {
        a.heading_weight = heading_weight(m.heading_error);
        a.bucket = bucket_of(bev_distance(frame.gts[m.gt_index].box), config.distance_edges);
      } else {
        a.bucket = bucket_of(bev_distance(frame.dets[d].box), config.distance_edges);
      }
      ranked[frame.dets[d].box.class_id].push_back(a);
    }
  }

  for (int c = 0; c < num_classes; ++c) {
    std::vector<RankedDetection> all;
    for (const Accumulated& a : ranked[c]) {
      const bool tp = a.label == MatchLabel::kTruePositive;
      all.push_back({a.score, tp, a.heading_weight});
      if (tp) {
        ++out[c].tp;
      } else {
        ++out[c].fp;
      }
    }
    const ApResult ap = average_precision(all, out[c].num_gt, config.recall);
    out[c].ap = ap.ap;
    out[c].defined = ap.defined;
    out[c].aph = average_precision(all, out[c].num_gt, config.recall, true).ap;

    out[c].bucket_ap.assign(std::max(num_buckets, 0), 0.0);
    for (int b = 0; b < num_buckets; ++b) {
      std::vector<RankedDetection> subset;
      for (const Accumulated& a : ranked[c]) {
        if (a.bucket == b) {
          subset.push_back({a.score, a.label == MatchLabel::kTruePositive, a.heading_weight});
        }
      }
      out[c].bucket_ap[b] = average_precision(subset, out[c].bucket_gt[b], config.recall).ap;
    }
  }
  return out;
}

void mean_over_classes(const std::vector<ClassMetrics>& classes, double& map, double& maph) {
  map = 0.0;
  maph = 0.0;
  if (classes.empty()) return;
  for (const auto& c : classes) {
    map += c.ap;
    maph += c.aph;
  }
  map /= static_cast<double>(classes.size());
  maph /= static_cast<double>(classes.size());
}

std::vector<PreparedFrame> prepare_all(const FrameDetections& dets, const FrameGroundTruths& gts,
                                       const EvalConfig& config) {
  if (dets.size() != gts.size()) {
    throw DataError("detections cover " + std::to_string(dets.size()) +
                    " frames but ground truth covers " + std::to_string(gts.size()));
  }
  std::vector<PreparedFrame> frames;
  frames.reserve(dets.size());
  for (std::size_t f = 0; f < dets.size(); ++f) frames.push_back(prepare(dets[f], gts[f], config));
  return frames;
}

std::vector<std::string> make_bucket_labels(const EvalConfig& config) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i + 1 < config.distance_edges.size(); ++i) {
    labels.push_back(bucket_label(config.distance_edges[i], config.distance_edges[i + 1]));
  }
  return labels;
}

}  // namespace

double polygon_area(std::span<const Point2> polygon) {
  if (polygon.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[(i + 1) % polygon.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return std::fabs(acc) / 2.0;
}

std::vector<Point2> clip_convex(std::span<const Point2> subject, std::span<const Point2> clip) {
  std::vector<Point2> output(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % clip.size()];
    const double edge_len = std::hypot(b.x - a.x, b.y - a.y);
    if (edge_len <= kClipEps) continue;
    const std::vector<Point2> input = std::move(output);
    output.clear();
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Point2& cur = input[i];
      const Point2& prev = input[(i + input.size() - 1) % input.size()];
      // Signed distance scaled by the edge length; >= -eps counts as inside.
      const double d_cur = cross(a, b, cur) / edge_len;
      const double d_prev = cross(a, b, prev) / edge_len;
      const bool in_cur = d_cur >= -kClipEps;
      const bool in_prev = d_prev >= -kClipEps;
      if (in_cur) {
        if (!in_prev && std::fabs(d_cur - d_prev) > 0.0) {
          output.push_back(line_intersection(prev, cur, a, b));
        }
        output.push_back(cur);
      } else if (in_prev && std::fabs(d_cur - d_prev) > 0.0) {
        output.push_back(line_intersection(prev, cur, a, b));
      }
    }
  }
  return output;
}

std::array<Point2, 4> bev_polygon(const Box3D& box) {
  const CornerSetBEV c = box_corners_bev(box);
  // Corner order 0..3 runs clockwise in the box frame; reverse it.
  return {c[3], c[2], c[1], c[0]};
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
  const double reach_a = std::hypot(a.dims.w, a.dims.l) / 2.0;
  const double reach_b = std::hypot(b.dims.w, b.dims.l) / 2.0;
  if (std::hypot(a.center.x - b.center.x, a.center.y - b.center.y) > reach_a + reach_b) {
    return 0.0;
  }
  const auto pa = bev_polygon(a);
  const auto pb = bev_polygon(b);
  return polygon_area(clip_convex(pa, pb));
}

double iou_bev(const Box3D& a, const Box3D& b) {
  const double area_a = a.dims.w * a.dims.l;
  const double area_b = b.dims.w * b.dims.l;
  if (!(area_a > 0.0) || !(area_b > 0.0)) return 0.0;
  if (a.center.x == b.center.x && a.center.y == b.center.y && a.dims.w == b.dims.w &&
      a.dims.l == b.dims.l && normalize_angle(a.yaw) == normalize_angle(b.yaw)) {
    return 1.0;
  }
  const double inter = std::min({bev_intersection_area(a, b), area_a, area_b});
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double vol_a = volume(a);
  const double vol_b = volume(b);
  if (!(vol_a > 0.0) || !(vol_b > 0.0)) return 0.0;
  if (a == b || (a.center == b.center && a.dims == b.dims &&
                 normalize_angle(a.yaw) == normalize_angle(b.yaw))) {
    return 1.0;
  }
  const double top = std::min(a.center.z + a.dims.h / 2.0, b.center.z + b.dims.h / 2.0);
  const double bottom = std::max(a.center.z - a.dims.h / 2.0, b.center.z - b.dims.h / 2.0);
  const double z_overlap = std::max(0.0, top - bottom);
  if (z_overlap <= 0.0) return 0.0;
  const double area =
      std::min({bev_intersection_area(a, b), a.dims.w * a.dims.l, b.dims.w * b.dims.l});
  const double inter = area * z_overlap;
  const double uni = vol_a + vol_b - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

EvalConfig EvalConfig::once() {
  EvalConfig c;
  c.class_names = {"Vehicle", "Pedestrian", "Cyclist"};
  c.iou_thresholds = {0.7, 0.3, 0.5};
  c.class_merge = {0, 0, 0, 1, 2};
  return c;
}

EvalConfig EvalConfig::waymo() {
  EvalConfig c;
  c.class_names = {"Vehicle", "Pedestrian", "Cyclist"};
  c.iou_thresholds = {0.7, 0.5, 0.5};
  c.class_merge = {};
  c.difficulty = DifficultyMode::kWaymoLevels;
  return c;
}

void validate(const EvalConfig& config) {
  if (config.class_names.empty()) throw ConfigError("evaluation needs at least one class");
  if (config.iou_thresholds.size() != config.class_names.size()) {
    throw ConfigError("one IoU threshold per evaluation class is required");
  }
  for (double t : config.iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("IoU thresholds must lie in (0, 1]");
  }
  for (int m : config.class_merge) {
    if (m < -1 || m >= static_cast<int>(config.class_names.size())) {
      throw ConfigError("class merge map points outside the evaluation classes");
    }
  }
  const RecallGrid& r = config.recall;
  if (r.count < 1 || !(r.start > 0.0) || !(r.step >= 0.0) || r.at(r.count - 1) > 1.0 + 1e-9) {
    throw ConfigError("recall grid must lie within (0, 1]");
  }
  for (std::size_t i = 1; i < config.distance_edges.size(); ++i) {
    if (!(config.distance_edges[i] > config.distance_edges[i - 1])) {
      throw ConfigError("distance bucket edges must be strictly increasing");
    }
  }
}

FrameMatch match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                            const EvalConfig& config, std::span<const std::uint8_t> gt_ignored) {
  FrameMatch out;
  out.detections.resize(dets.size());
  out.gt_matched.assign(gts.size(), false);

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  const int num_classes = static_cast<int>(config.iou_thresholds.size());
  for (std::size_t idx : order) {
    const Detection& det = dets[idx];
    DetectionMatch& m = out.detections[idx];
    const int c = det.class_id();
    if (c < 0 || c >= num_classes) continue;
    const double threshold = config.iou_thresholds[c];
    double best = -1.0;
    int best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (out.gt_matched[g] || gts[g].box.class_id != c) continue;
      const double iou = config.iou_mode == IouMode::k3d ? iou_3d(det.box, gts[g].box)
                                                         : iou_bev(det.box, gts[g].box);
      if (iou >= threshold && iou > best) {
        best = iou;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt < 0) continue;
    m.gt_index = best_gt;
    m.iou = best;
    m.heading_error = heading_difference(det.box.yaw, gts[best_gt].box.yaw);
    if (config.orientation_gate && m.heading_error > std::numbers::pi / 2.0) {
      m.orientation_rejected = true;
      continue;
    }
    out.gt_matched[best_gt] = true;
    const bool ignored = !gt_ignored.empty() && gt_ignored[best_gt] != 0;
    m.label = ignored ? MatchLabel::kIgnored : MatchLabel::kTruePositive;
  }
  return out;
}

double heading_weight(double heading_error) {
  return std::clamp(1.0 - heading_error / std::numbers::pi, 0.0, 1.0);
}

ApResult average_precision(std::span<const RankedDetection> detections, int num_gt,
                           const RecallGrid& grid, bool heading_weighted) {
  ApResult result;
  if (num_gt <= 0) return result;
  result.defined = true;

  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].score > detections[b].score;
  });

  std::vector<double> precision(order.size());
  std::vector<double> recall(order.size());
  double tp = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const RankedDetection& d = detections[order[i]];
    if (d.true_positive) tp += heading_weighted ? d.heading_weight : 1.0;
    precision[i] = tp / static_cast<double>(i + 1);
    recall[i] = tp / static_cast<double>(num_gt);
  }
  // Running max from the tail gives max precision over recall >= recall[i].
  std::vector<double> envelope(precision);
  for (std::size_t i = envelope.size(); i-- > 1;) {
    envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  }

  constexpr double kRecallSlack = 1e-12;
  double acc = 0.0;
  std::size_t cursor = 0;
  for (int k = 0; k < grid.count; ++k) {
    const double r = grid.at(k);
    // Recall is non-decreasing, so the first index reaching r carries the max.
    while (cursor < recall.size() && recall[cursor] < r - kRecallSlack) ++cursor;
    if (cursor < recall.size()) acc += envelope[cursor];
  }
  result.ap = acc / grid.count;
  return result;
}

std::string bucket_label(double lo, double hi) {
  std::ostringstream os;
  os << lo << "m-";
  if (std::isinf(hi)) {
    os << "inf";
  } else {
    os << hi << "m";
  }
  return os.str();
}

EvalReport evaluate_once(const FrameDetections& dets, const FrameGroundTruths& gts,
                         const EvalConfig& config, int jobs) {
  validate(config);
  const std::vector<PreparedFrame> frames = prepare_all(dets, gts, config);
  std::vector<FrameMatch> matches(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t f) {
    matches[f] = match_detections(frames[f].dets, frames[f].gts, config);
  });

  EvalReport report;
  report.bucket_labels = make_bucket_labels(config);
  report.classes = summarize(frames, matches, config, [](std::size_t, std::size_t) { return false; });
  mean_over_classes(report.classes, report.map, report.maph);
  return report;
}

EvalReport evaluate_waymo(const FrameDetections& dets, const FrameGroundTruths& gts,
                          const EvalConfig& config, int jobs) {
  validate(config);
  for (std::size_t f = 0; f < gts.size(); ++f) {
    for (std::size_t g = 0; g < gts[f].size(); ++g) {
      if (!gts[f][g].num_points) {
        throw DataError("ground truth " + std::to_string(g) + " of frame " + std::to_string(f) +
                        " has no point count; difficulty levels need one");
      }
    }
  }
  EvalReport report = evaluate_once(dets, gts, config, jobs);
  const std::vector<PreparedFrame> frames = prepare_all(dets, gts, config);

  struct Level {
    const char* name;
    int min_points;
  };
  for (const Level level : {Level{"LEVEL_1", 6}, Level{"LEVEL_2", 1}}) {
    std::vector<std::vector<std::uint8_t>> ignored(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      for (const GroundTruth& g : frames[f].gts) {
        ignored[f].push_back(*g.num_points < level.min_points ? 1 : 0);
      }
    }
    std::vector<FrameMatch> matches(frames.size());
    parallel_for(frames.size(), jobs, [&](std::size_t f) {
      matches[f] = match_detections(frames[f].dets, frames[f].gts, config, ignored[f]);
    });
    LevelMetrics lm;
    lm.name = level.name;
    lm.classes = summarize(frames, matches, config,
                           [&](std::size_t f, std::size_t g) { return ignored[f][g] != 0; });
    mean_over_classes(lm.classes, lm.map, lm.maph);
    report.levels.push_back(std::move(lm));
  }
  return report;
}

EvalReport evaluate(const FrameDetections& dets, const FrameGroundTruths& gts,
                    const EvalConfig& config, int jobs) {
  return config.difficulty == DifficultyMode::kWaymoLevels ? evaluate_waymo(dets, gts, config, jobs)
                                                           : evaluate_once(dets, gts, config, jobs);
}

}  // namespace cornerkit
