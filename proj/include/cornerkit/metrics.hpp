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
/// \file
/// \brief Rotated-box overlap and orientation-aware AP / APH evaluation.
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cornerkit/detection.hpp"
#include "cornerkit/geometry.hpp"

namespace cornerkit {

// ---------------------------------------------------------------------------
// Overlap

/// Shoelace area, absolute value.
double polygon_area(std::span<const Point2> polygon);

/// Sutherland-Hodgman clip of a convex subject against a convex,
/// counter-clockwise clip polygon.
std::vector<Point2> clip_convex(std::span<const Point2> subject, std::span<const Point2> clip);

/// Box footprint as a counter-clockwise quadrilateral.
std::array<Point2, 4> bev_polygon(const Box3D& box);

double bev_intersection_area(const Box3D& a, const Box3D& b);
double iou_bev(const Box3D& a, const Box3D& b);
double iou_3d(const Box3D& a, const Box3D& b);

// ---------------------------------------------------------------------------
// Evaluation configuration

struct RecallGrid {
  int count = 50;
  double start = 0.02;
  double step = 0.02;

  double at(int k) const { return start + k * step; }
};

enum class IouMode { kBev, k3d };
enum class DifficultyMode { kNone, kWaymoLevels };

struct EvalConfig {
  // Evaluation classes after merging, with their IoU thresholds.
  std::vector<std::string> class_names;
  std::vector<double> iou_thresholds;
  // Raw class id -> evaluation class id; -1 drops the class. Empty = identity.
  std::vector<int> class_merge;
  bool orientation_gate = true;
  RecallGrid recall;
  // Ascending BEV-distance edges; bucket i is [edges[i], edges[i+1]).
  std::vector<double> distance_edges{0.0, 30.0, 50.0, std::numeric_limits<double>::infinity()};
  DifficultyMode difficulty = DifficultyMode::kNone;
  IouMode iou_mode = IouMode::k3d;

  /// Car/Bus/Truck merged into Vehicle, thresholds 0.7 / 0.3 / 0.5.
  static EvalConfig once();
  /// Vehicle/Pedestrian/Cyclist at 0.7 / 0.5 / 0.5 with LEVEL_1 / LEVEL_2.
  static EvalConfig waymo();
};

void validate(const EvalConfig& config);

// ---------------------------------------------------------------------------
// Matching

enum class MatchLabel { kTruePositive, kFalsePositive, kIgnored };

struct DetectionMatch {
  MatchLabel label = MatchLabel::kFalsePositive;
  int gt_index = -1;         // best same-class GT passing the IoU threshold
  double iou = 0.0;
  double heading_error = 0.0;  // in [0, pi], valid when gt_index >= 0
  bool orientation_rejected = false;
};

struct FrameMatch {
  std::vector<DetectionMatch> detections;  // in input order
  std::vector<bool> gt_matched;
};

/// Greedy matching in descending score order (ties keep input order). Each
/// detection takes the unmatched same-class GT of highest IoU at or above the
/// class threshold. Under the orientation gate a heading error above pi/2
/// turns the detection into a false positive and leaves the GT unmatched.
/// A detection whose GT is flagged (non-zero) in gt_ignored is labelled kIgnored and
/// consumes that GT. Class ids on both sides are evaluation class ids.
FrameMatch match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                            const EvalConfig& config, std::span<const std::uint8_t> gt_ignored = {});

// ---------------------------------------------------------------------------
// Average precision

struct RankedDetection {
  double score = 0.0;
  bool true_positive = false;
  // Contribution of a true positive to the heading-weighted counts.
  double heading_weight = 1.0;
};

/// 1 - heading_error / pi, clamped to [0, 1].
double heading_weight(double heading_error);

struct ApResult {
  double ap = 0.0;
  bool defined = false;  // false when there are no ground truths
};

/// Mean over the recall grid of the interpolated precision
/// max{precision(i) : recall(i) >= r}, 0 where r is unreachable. With
/// heading_weighted each true positive counts heading_weight instead of 1.
ApResult average_precision(std::span<const RankedDetection> detections, int num_gt,
                           const RecallGrid& grid, bool heading_weighted = false);

// ---------------------------------------------------------------------------
// Reports

struct ClassMetrics {
  std::string name;
  int num_gt = 0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double ap = 0.0;
  double aph = 0.0;
  bool defined = false;
  std::vector<double> bucket_ap;
  std::vector<int> bucket_gt;
};

struct LevelMetrics {
  std::string name;
  std::vector<ClassMetrics> classes;
  double map = 0.0;
  double maph = 0.0;
};

struct EvalReport {
  std::vector<std::string> bucket_labels;
  std::vector<ClassMetrics> classes;
  double map = 0.0;
  double maph = 0.0;
  std::vector<LevelMetrics> levels;
};

using FrameDetections = std::vector<std::vector<Detection>>;
using FrameGroundTruths = std::vector<std::vector<GroundTruth>>;

/// Per-class AP overall and per GT-distance bucket; mAP is the unweighted
/// mean over evaluation classes (classes without GTs contribute 0). Inputs
/// use raw class ids and are mapped through config.class_merge.
EvalReport evaluate_once(const FrameDetections& dets, const FrameGroundTruths& gts,
                         const EvalConfig& config, int jobs = 1);

/// evaluate_once plus LEVEL_1 (> 5 points) and LEVEL_2 (>= 1 point) results.
/// GTs outside a level are ignored for that level. Throws DataError when a
/// GT has no point count.
EvalReport evaluate_waymo(const FrameDetections& dets, const FrameGroundTruths& gts,
                          const EvalConfig& config, int jobs = 1);

/// Dispatches on config.difficulty.
EvalReport evaluate(const FrameDetections& dets, const FrameGroundTruths& gts,
                    const EvalConfig& config, int jobs = 1);

std::string bucket_label(double lo, double hi);

}  // namespace cornerkit
