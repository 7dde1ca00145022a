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
#include "cornerkit/voxelizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cornerkit/error.hpp"
#include "cornerkit/random.hpp"

namespace cornerkit {
namespace {

int axis_cells(double extent, double size) {
  const double ratio = extent / size;
  const double nearest = std::round(ratio);
  if (std::fabs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<int>(nearest);
  }
  return static_cast<int>(std::floor(ratio));
}

// Open-addressing map from cell key to slot; keys are non-negative.
class SlotTable {
 public:
  explicit SlotTable(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected) cap <<= 1;
    keys_.assign(cap, -1);
    slots_.resize(cap);
    mask_ = cap - 1;
  }

  // Slot for key, inserting next_slot if absent. Returns {slot, inserted}.
  std::pair<std::uint32_t, bool> find_or_insert(std::int64_t key, std::uint32_t next_slot) {
    std::size_t h = static_cast<std::size_t>(splitmix(static_cast<std::uint64_t>(key))) & mask_;
    while (true) {
      if (keys_[h] == key) return {slots_[h], false};
      if (keys_[h] < 0) {
        keys_[h] = key;
        slots_[h] = next_slot;
        return {next_slot, true};
      }
      h = (h + 1) & mask_;
    }
  }

  void erase_last(std::int64_t key) {
    std::size_t h = static_cast<std::size_t>(splitmix(static_cast<std::uint64_t>(key))) & mask_;
    while (keys_[h] != key) h = (h + 1) & mask_;
    // Only the most recent insertion is ever erased, so nothing probes past it yet.
    keys_[h] = -1;
  }

 private:
  static std::uint64_t splitmix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::vector<std::int64_t> keys_;
  std::vector<std::uint32_t> slots_;
  std::size_t mask_ = 0;
};

std::optional<VoxelIndex> cell_of(const Vec3& p, const GridSpec& spec, const GridDims& dims) {
  if (!(p.x >= spec.x_min() && p.x < spec.x_max() && p.y >= spec.y_min() &&
        p.y < spec.y_max() && p.z >= spec.z_min() && p.z < spec.z_max())) {
    return std::nullopt;
  }
  // Shifted coordinates are non-negative here, so floor matches truncation.
  const VoxelIndex index{static_cast<int>(std::floor((p.x - spec.x_min()) / spec.voxel_size[0])),
                         static_cast<int>(std::floor((p.y - spec.y_min()) / spec.voxel_size[1])),
                         static_cast<int>(std::floor((p.z - spec.z_min()) / spec.voxel_size[2]))};
  if (index.ix >= dims.nx || index.iy >= dims.ny || index.iz >= dims.nz) return std::nullopt;
  return index;
}

}  // namespace

void validate(const GridSpec& spec) {
  for (int a = 0; a < 3; ++a) {
    if (!(std::isfinite(spec.range[a]) && std::isfinite(spec.range[a + 3]))) {
      throw ConfigError("grid range must be finite");
    }
    if (!(spec.range[a + 3] > spec.range[a])) {
      throw ConfigError("grid range max must exceed min on axis " + std::to_string(a));
    }
    if (!(spec.voxel_size[a] > 0.0) || !std::isfinite(spec.voxel_size[a])) {
      throw ConfigError("voxel size must be positive on axis " + std::to_string(a));
    }
  }
  if (spec.max_points_per_voxel < 1) throw ConfigError("max points per voxel must be >= 1");
  if (spec.out_factor < 1) throw ConfigError("out_factor must be >= 1");
  if (spec.max_voxels < 0) throw ConfigError("max_voxels must be >= 0");
  const GridDims dims = grid_dims(spec);
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) {
    throw ConfigError("grid must have at least one cell per axis");
  }
}

GridDims grid_dims(const GridSpec& spec) {
  return {axis_cells(spec.x_max() - spec.x_min(), spec.voxel_size[0]),
          axis_cells(spec.y_max() - spec.y_min(), spec.voxel_size[1]),
          axis_cells(spec.z_max() - spec.z_min(), spec.voxel_size[2])};
}

std::optional<VoxelIndex> voxel_index(const Vec3& p, const GridSpec& spec) {
  return cell_of(p, spec, grid_dims(spec));
}

VoxelSet voxelize(const PointCloud& cloud, const GridSpec& spec, std::uint64_t seed) {
  validate(spec);
  const GridDims dims = grid_dims(spec);
  const int width = cloud.stride();
  const int max_points = spec.max_points_per_voxel;

  // Pass 1: slot per point, voxels numbered in first-seen order.
  constexpr std::uint32_t kNoSlot = 0xffffffffu;
  SlotTable table(cloud.size());
  std::vector<std::uint32_t> slot_of_point(cloud.size(), kNoSlot);
  std::vector<VoxelIndex> indices;
  std::vector<std::uint32_t> sizes;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto index = cell_of(cloud.position(i), spec, dims);
    if (!index) continue;
    const std::int64_t key =
        (static_cast<std::int64_t>(index->iz) * dims.ny + index->iy) * dims.nx + index->ix;
    const auto [slot, inserted] = table.find_or_insert(key, static_cast<std::uint32_t>(indices.size()));
    if (inserted) {
      if (spec.max_voxels > 0 && static_cast<std::int64_t>(indices.size()) >= spec.max_voxels) {
        table.erase_last(key);
        continue;
      }
      indices.push_back(*index);
      sizes.push_back(0);
    }
    slot_of_point[i] = slot;
    ++sizes[slot];
  }

  // Pass 2: member lists in cloud order, stored contiguously.
  std::vector<std::uint32_t> start(sizes.size() + 1, 0);
  for (std::size_t v = 0; v < sizes.size(); ++v) start[v + 1] = start[v] + sizes[v];
  std::vector<std::uint32_t> members(start.back());
  {
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (slot_of_point[i] != kNoSlot) members[fill[slot_of_point[i]]++] = static_cast<std::uint32_t>(i);
    }
  }

  VoxelSet out;
  out.max_points = max_points;
  out.point_width = width;
  out.indices = std::move(indices);
  out.counts.resize(out.indices.size());
  out.points.assign(out.indices.size() * static_cast<std::size_t>(max_points) * width, 0.0);

  Rng rng(seed);
  const double* src = cloud.values().data();
  for (std::size_t v = 0; v < sizes.size(); ++v) {
    std::span<std::uint32_t> list(members.data() + start[v], sizes[v]);
    if (list.size() > static_cast<std::size_t>(max_points)) {
      rng.shuffle_prefix(list, static_cast<std::size_t>(max_points));
      list = list.first(static_cast<std::size_t>(max_points));
      std::sort(list.begin(), list.end());
    }
    out.counts[v] = static_cast<int>(list.size());
    double* dst = out.points.data() + v * static_cast<std::size_t>(max_points) * width;
    for (std::size_t r = 0; r < list.size(); ++r) {
      std::copy_n(src + static_cast<std::size_t>(list[r]) * width, width, dst + r * width);
    }
  }
  return out;
}

BevShape bev_shape(const GridSpec& spec) {
  return {axis_cells(spec.y_max() - spec.y_min(), spec.voxel_size[1] * spec.out_factor),
          axis_cells(spec.x_max() - spec.x_min(), spec.voxel_size[0] * spec.out_factor)};
}

int conv_output_size(int input, int kernel, int stride, int padding) {
  if (kernel < 1 || stride < 1 || padding < 0) throw ConfigError("invalid convolution geometry");
  const int span = input + 2 * padding - kernel;
  return span < 0 ? 0 : span / stride + 1;
}

int bev_depth(const GridSpec& spec) {
  int depth = grid_dims(spec).nz;
  for (int stage = 0; stage < 3; ++stage) depth = conv_output_size(depth, 3, 2, 1);
  return conv_output_size(depth, 3, 2, 0);
}

int bev_feature_channels(int depth, int features) { return depth * features; }

int fused_channel_count(int features, int num_classes, int num_corners) {
  if (features < 0 || num_classes < 0 || num_corners < 0) {
    throw ConfigError("channel counts must be non-negative");
  }
  return features + num_classes * num_corners + 2 * num_corners;
}

}  // namespace cornerkit
