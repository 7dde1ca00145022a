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
/// \brief Dense supervision targets on the downsampled BEV grid.
///
/// Grid axes: rows index y (p_y), columns index x (p_x). Corner heatmap
/// channels are class-major (class_id * n + corner type); corner offsets are
/// shared across classes, two planes per corner type.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cornerkit/corner_assigner.hpp"
#include "cornerkit/geometry.hpp"
#include "cornerkit/grid.hpp"
#include "cornerkit/voxelizer.hpp"

namespace cornerkit {

struct TargetConfig {
  int num_classes = 5;
  int num_corners = 3;  // first n of (IVC, PVCL, PVCW, VC)
  int radius = 2;
  bool skip_degenerate = false;
};

void validate(const TargetConfig& config);

/// Channels of the 8-d center regression.
enum RegressionChannel : int {
  kRegOffsetX = 0,
  kRegOffsetY = 1,
  kRegZ = 2,
  kRegLogW = 3,
  kRegLogL = 4,
  kRegLogH = 5,
  kRegSin = 6,
  kRegCos = 7,
  kRegChannels = 8,
};

/// Floored BEV cell of a keypoint and the residual from the cell's minimum
/// corner, in meters. The residual lies in [0, cell) per axis.
struct KeypointCell {
  int row = 0;
  int col = 0;
  double offset_x = 0.0;
  double offset_y = 0.0;
};

std::optional<KeypointCell> locate_keypoint(const Point2& p, const GridSpec& spec);

/// Position reconstructed from a cell and its residual.
Point2 cell_position(int row, int col, double offset_x, double offset_y, const GridSpec& spec);

/// Gaussian value exp(-(dx^2 + dy^2) / (2 sigma^2)) with sigma = radius / 3.
double gaussian_value(int dx, int dy, int radius);

/// Max-merges a Gaussian centred on (row, col) into one channel. Pixels with
/// dx^2 + dy^2 <= radius^2 are touched. Throws when the centre is off-grid.
void gaussian_splat(Grid& heatmap, int channel, int row, int col, int radius);

struct CornerTargets {
  Grid heatmap;   // H x W x (C * n)
  Grid offsets;   // H x W x (2 * n)
  MaskGrid mask;  // H x W x n
  int skipped_out_of_range = 0;
  int skipped_degenerate = 0;
  int collisions = 0;
};

struct CenterTargets {
  Grid heatmap;     // H x W x C
  Grid regression;  // H x W x 8
  MaskGrid mask;    // H x W x 1
  int skipped_out_of_range = 0;
  int collisions = 0;
};

struct TargetBundle {
  CornerTargets corners;
  CenterTargets centers;
  std::vector<CornerSelection> selections;
};

CornerTargets corner_targets(std::span<const Box3D> boxes,
                             std::span<const CornerSelection> selections, const GridSpec& spec,
                             const TargetConfig& config);

CenterTargets center_targets(std::span<const Box3D> boxes, const GridSpec& spec,
                             const TargetConfig& config);

TargetBundle build_targets(std::span<const Box3D> boxes, const PointCloud& cloud,
                           const GridSpec& spec, const TargetConfig& config);

}  // namespace cornerkit
