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
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cornerkit/geometry.hpp"

namespace cornerkit {

struct GridSpec {
  // x_min, y_min, z_min, x_max, y_max, z_max
  std::array<double, 6> range{-75.2, -75.2, -5.0, 75.2, 75.2, 3.0};
  std::array<double, 3> voxel_size{0.1, 0.1, 0.2};
  int max_points_per_voxel = 5;
  int out_factor = 8;
  // 0 means unlimited.
  std::int64_t max_voxels = 0;

  double x_min() const { return range[0]; }
  double y_min() const { return range[1]; }
  double z_min() const { return range[2]; }
  double x_max() const { return range[3]; }
  double y_max() const { return range[4]; }
  double z_max() const { return range[5]; }

  // BEV cell edge after backbone downsampling.
  double cell_x() const { return voxel_size[0] * out_factor; }
  double cell_y() const { return voxel_size[1] * out_factor; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Throws ConfigError when the grid violates its invariants.
void validate(const GridSpec& spec);

struct VoxelIndex {
  int ix = 0;
  int iy = 0;
  int iz = 0;

  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

struct GridDims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// floor(extent / size) per axis; extents that are an integer multiple of the
/// size up to 1e-9 relative are treated as exact.
GridDims grid_dims(const GridSpec& spec);

/// Cell of p, or nullopt when p lies outside [min, max) on any axis.
std::optional<VoxelIndex> voxel_index(const Vec3& p, const GridSpec& spec);

struct VoxelSet {
  int max_points = 0;    // T
  int point_width = 0;   // 3 + m
  std::vector<VoxelIndex> indices;
  std::vector<int> counts;
  // N x T x point_width, rows past counts[i] are zero.
  std::vector<double> points;

  std::size_t size() const noexcept { return indices.size(); }
  const double* block(std::size_t i) const {
    return points.data() + i * static_cast<std::size_t>(max_points) * point_width;
  }
};

/// Groups in-range points by cell. Voxels appear in order of their first
/// point. Cells holding more than T points keep a seeded uniform subset
/// (sampled without replacement); the kept points retain their cloud order.
VoxelSet voxelize(const PointCloud& cloud, const GridSpec& spec, std::uint64_t seed);

struct BevShape {
  int height = 0;  // rows, along y
  int width = 0;   // cols, along x

  friend bool operator==(const BevShape&, const BevShape&) = default;
};

BevShape bev_shape(const GridSpec& spec);

/// Output extent of a strided convolution along one axis.
int conv_output_size(int input, int kernel, int stride, int padding);

/// Depth D remaining on the z axis after the sparse backbone: three
/// (k3, s2, p1) stages followed by the (k3, s2, p0) z-reduction.
int bev_depth(const GridSpec& spec);

/// Channel width of the flattened BEV map (D x F).
int bev_feature_channels(int depth, int features);

/// Channels entering the detection head: backbone features f, corner score
/// maps C x n and corner offsets 2 x n.
int fused_channel_count(int features, int num_classes, int num_corners);

}  // namespace cornerkit
