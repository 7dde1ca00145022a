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
/// \brief Adaptive visible / partly-visible / invisible corner selection.
///
/// The BEV rectangle of each box is split into the four box-frame quadrants
///   q0: x < 0, y > 0    q1: x > 0, y > 0
///   q3: x < 0, y < 0    q2: x > 0, y < 0
/// and the interior points are counted per quadrant. The quadrant judged to
/// face the sensor gives the visible corner (VC); its diagonal opposite is the
/// invisible corner (IVC) and the two remaining corners are the partly visible
/// ones along the length (PVCL) and width (PVCW) edges.
#pragma once

#include <array>
#include <span>
#include <vector>

#include "cornerkit/geometry.hpp"

namespace cornerkit {

/// Corner roles in supervision order. The first n roles are used when a
/// target is built with n corners.
enum class CornerType : int {
  kInvisible = 0,
  kPartlyVisibleLength = 1,
  kPartlyVisibleWidth = 2,
  kVisible = 3,
};

inline constexpr int kNumCornerTypes = 4;

const char* corner_type_name(CornerType type);

struct QuadrantHistogram {
  std::array<int, 4> q{0, 0, 0, 0};

  int total() const noexcept { return q[0] + q[1] + q[2] + q[3]; }
  friend bool operator==(const QuadrantHistogram&, const QuadrantHistogram&) = default;
};

/// Points lying on a local axis (x == 0 or y == 0) fall in no quadrant.
QuadrantHistogram quadrant_histogram(std::span<const Vec3> local_points);

/// Quadrant whose corner is treated as visible. With at most two populated
/// quadrants the fullest one wins; otherwise each quadrant is scored together
/// with its two edge neighbours. Ties resolve to the lowest index.
int visible_quadrant(const QuadrantHistogram& histogram);

/// Source corner indices (IVC, PVCL, PVCW) for every visible quadrant.
inline constexpr std::array<std::array<int, 3>, 4> kAuxiliaryCornerTable{
    {{2, 3, 1}, {3, 2, 0}, {0, 1, 3}, {1, 0, 2}}};

struct CornerSelection {
  Point2 vc;
  Point2 pvcl;
  Point2 pvcw;
  Point2 ivc;
  // Source corner index per CornerType.
  std::array<int, kNumCornerTypes> corner_indices{0, 0, 0, 0};
  int max_quadrant = 0;
  QuadrantHistogram histogram;
  int interior_points = 0;
  // No interior points; the selection falls back to quadrant 0.
  bool degenerate = false;

  const Point2& corner(CornerType type) const;
  int corner_index(CornerType type) const { return corner_indices[static_cast<int>(type)]; }
};

CornerSelection select_corners(const Box3D& box, const PointCloud& points);

/// Selection from a histogram that is already known, e.g. for boxes whose
/// interior points were gathered elsewhere.
CornerSelection select_corners(const Box3D& box, const QuadrantHistogram& histogram,
                               int interior_points);

/// select_corners for every box; a point inside several boxes counts for each.
std::vector<CornerSelection> assign_frame(std::span<const Box3D> boxes, const PointCloud& cloud);

}  // namespace cornerkit
