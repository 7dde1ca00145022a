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
#include "cornerkit/target_builder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cornerkit/error.hpp"

namespace cornerkit {
namespace {

// Floored cell and residual along one axis. Rounding can leave the residual
// a hair outside [0, cell); the cell index is nudged so the residual is
// representable in range.
bool locate_axis(double value, double min, double cell, int cells, int& index, double& offset) {
  const double scaled = (value - min) / cell;
  if (!std::isfinite(scaled)) return false;
  double floored = std::floor(scaled);
  if (floored < 0.0 || floored >= cells) return false;
  index = static_cast<int>(floored);
  offset = value - (index * cell + min);
  if (offset >= cell && index + 1 < cells) {
    ++index;
    offset = value - (index * cell + min);
  } else if (offset < 0.0 && index > 0) {
    --index;
    offset = value - (index * cell + min);
  }
  if (offset < 0.0) offset = 0.0;
  if (offset >= cell) offset = std::nextafter(cell, 0.0);
  return true;
}

}  // namespace

void validate(const TargetConfig& config) {
  if (config.num_classes < 1) throw ConfigError("num_classes must be >= 1");
  if (config.num_corners < 1 || config.num_corners > kNumCornerTypes) {
    throw ConfigError("num_corners must be in 1..4");
  }
  if (config.radius < 0) throw ConfigError("gaussian radius must be >= 0");
}

std::optional<KeypointCell> locate_keypoint(const Point2& p, const GridSpec& spec) {
  const BevShape shape = bev_shape(spec);
  KeypointCell cell;
  if (!locate_axis(p.x, spec.x_min(), spec.cell_x(), shape.width, cell.col, cell.offset_x)) {
    return std::nullopt;
  }
  if (!locate_axis(p.y, spec.y_min(), spec.cell_y(), shape.height, cell.row, cell.offset_y)) {
    return std::nullopt;
  }
  return cell;
}

Point2 cell_position(int row, int col, double offset_x, double offset_y, const GridSpec& spec) {
  return {col * spec.cell_x() + spec.x_min() + offset_x,
          row * spec.cell_y() + spec.y_min() + offset_y};
}

double gaussian_value(int dx, int dy, int radius) {
  if (dx == 0 && dy == 0) return 1.0;
  const double sigma = radius / 3.0;
  return std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

void gaussian_splat(Grid& heatmap, int channel, int row, int col, int radius) {
  if (!heatmap.contains(row, col) || channel < 0 || channel >= heatmap.channels()) {
    throw ShapeError("gaussian centre (" + std::to_string(row) + ", " + std::to_string(col) +
                     ", " + std::to_string(channel) + ") outside heatmap");
  }
  const int r2 = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const int rr = row + dy;
      const int cc = col + dx;
      if (!heatmap.contains(rr, cc)) continue;
      double& cell = heatmap.at(rr, cc, channel);
      cell = std::max(cell, gaussian_value(dx, dy, radius));
    }
  }
}

CornerTargets corner_targets(std::span<const Box3D> boxes,
                             std::span<const CornerSelection> selections, const GridSpec& spec,
                             const TargetConfig& config) {
  validate(config);
  if (boxes.size() != selections.size()) {
    throw ShapeError("corner_targets: " + std::to_string(boxes.size()) + " boxes but " +
                     std::to_string(selections.size()) + " selections");
  }
  const BevShape shape = bev_shape(spec);
  const int n = config.num_corners;
  CornerTargets out;
  out.heatmap = Grid(shape.height, shape.width, config.num_classes * n);
  out.offsets = Grid(shape.height, shape.width, 2 * n);
  out.mask = MaskGrid(shape.height, shape.width, n);

  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const Box3D& box = boxes[b];
    validate_box(box, config.num_classes);
    if (config.skip_degenerate && selections[b].degenerate) {
      ++out.skipped_degenerate;
      continue;
    }
    for (int t = 0; t < n; ++t) {
      const Point2& corner = selections[b].corner(static_cast<CornerType>(t));
      const auto cell = locate_keypoint(corner, spec);
      if (!cell) {
        ++out.skipped_out_of_range;
        continue;
      }
      gaussian_splat(out.heatmap, box.class_id * n + t, cell->row, cell->col, config.radius);
      std::uint8_t& flag = out.mask.at(cell->row, cell->col, t);
      if (flag != 0) ++out.collisions;
      flag = 1;
      out.offsets.at(cell->row, cell->col, 2 * t) = cell->offset_x;
      out.offsets.at(cell->row, cell->col, 2 * t + 1) = cell->offset_y;
    }
  }
  return out;
}

CenterTargets center_targets(std::span<const Box3D> boxes, const GridSpec& spec,
                             const TargetConfig& config) {
  validate(config);
  const BevShape shape = bev_shape(spec);
  CenterTargets out;
  out.heatmap = Grid(shape.height, shape.width, config.num_classes);
  out.regression = Grid(shape.height, shape.width, kRegChannels);
  out.mask = MaskGrid(shape.height, shape.width, 1);

  for (const Box3D& box : boxes) {
    validate_box(box, config.num_classes);
    const auto cell = locate_keypoint({box.center.x, box.center.y}, spec);
    if (!cell) {
      ++out.skipped_out_of_range;
      continue;
    }
    gaussian_splat(out.heatmap, box.class_id, cell->row, cell->col, config.radius);
    std::uint8_t& flag = out.mask.at(cell->row, cell->col, 0);
    if (flag != 0) ++out.collisions;
    flag = 1;
    const double values[kRegChannels] = {cell->offset_x,       cell->offset_y,
                                         box.center.z,         std::log(box.dims.w),
                                         std::log(box.dims.l), std::log(box.dims.h),
                                         std::sin(box.yaw),    std::cos(box.yaw)};
    for (int k = 0; k < kRegChannels; ++k) out.regression.at(cell->row, cell->col, k) = values[k];
  }
  return out;
}

TargetBundle build_targets(std::span<const Box3D> boxes, const PointCloud& cloud,
                           const GridSpec& spec, const TargetConfig& config) {
  validate(spec);
  TargetBundle bundle;
  bundle.selections = assign_frame(boxes, cloud);
  bundle.corners = corner_targets(boxes, bundle.selections, spec, config);
  bundle.centers = center_targets(boxes, spec, config);
  return bundle;
}

}  // namespace cornerkit
