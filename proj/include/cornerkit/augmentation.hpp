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
/// \brief Training-time augmentation: ground-truth database sampling and
/// global flip / rotation / scaling.
#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cornerkit/frame.hpp"
#include "cornerkit/geometry.hpp"

namespace cornerkit {

struct GtDatabaseEntry {
  Box3D box;               // pose the object was cropped at
  PointCloud local_points;  // interior points in the box frame
  std::string source_frame;
};

struct GtDatabase {
  int attr_dim = 0;
  std::vector<std::vector<GtDatabaseEntry>> by_class;
  int skipped_empty = 0;

  std::size_t size() const;
};

GtDatabase build_gt_database(std::span<const Frame> frames, int num_classes);

/// Per-class sample counts for Car, Bus, Truck, Pedestrian, Cyclist.
inline const std::vector<int> kDefaultSampleCounts{1, 4, 3, 2, 2};

struct PasteResult {
  Frame frame;
  std::vector<int> pasted_per_class;
  int rejected = 0;
};

/// Draws up to counts[c] entries per class without replacement and pastes
/// them at their stored pose. A candidate overlapping (BEV IoU > 0) any box
/// already in the frame or pasted before it is rejected.
PasteResult sample_and_paste(const Frame& frame, const GtDatabase& db, std::span<const int> counts,
                             std::uint64_t seed);

struct GlobalTransform {
  bool flip_x = false;  // mirror across the x axis: y -> -y, yaw -> -yaw
  bool flip_y = false;  // mirror across the y axis: x -> -x, yaw -> pi - yaw
  double rotation = 0.0;
  double scale = 1.0;

  friend bool operator==(const GlobalTransform&, const GlobalTransform&) = default;
};

struct AugmentRanges {
  double flip_probability = 0.5;
  double max_rotation = std::numbers::pi / 4.0;
  double min_scale = 0.95;
  double max_scale = 1.05;
};

GlobalTransform draw_global_transform(std::uint64_t seed, const AugmentRanges& ranges = {});

/// Applies flips, then the rotation about the origin, then the scale, to
/// points and boxes alike.
Frame apply_global_transform(const Frame& frame, const GlobalTransform& transform);

Frame global_augment(const Frame& frame, std::uint64_t seed, const AugmentRanges& ranges = {});

}  // namespace cornerkit
