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
#include "cornerkit/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cornerkit/error.hpp"
#include "cornerkit/metrics.hpp"
#include "cornerkit/random.hpp"

namespace cornerkit {

std::size_t GtDatabase::size() const {
  std::size_t n = 0;
  for (const auto& list : by_class) n += list.size();
  return n;
}

GtDatabase build_gt_database(std::span<const Frame> frames, int num_classes) {
  if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
  GtDatabase db;
  db.by_class.resize(num_classes);
  db.attr_dim = frames.empty() ? 0 : frames.front().cloud.attr_dim();
  for (const Frame& frame : frames) {
    if (frame.cloud.attr_dim() != db.attr_dim) {
      throw DataError("frame " + frame.id + " has a different point attribute width");
    }
    for (const Box3D& box : frame.boxes) {
      validate_box(box, num_classes);
      const BoxFrame bf(box);
      GtDatabaseEntry entry{box, PointCloud(db.attr_dim), frame.id};
      for (std::size_t i = 0; i < frame.cloud.size(); ++i) {
        const Vec3 p = frame.cloud.position(i);
        if (!bf.contains(p)) continue;
        entry.local_points.push_back(bf.to_local(p), frame.cloud.record(i).subspan(3));
      }
      if (entry.local_points.empty()) {
        ++db.skipped_empty;
        continue;
      }
      db.by_class[box.class_id].push_back(std::move(entry));
    }
  }
  return db;
}

PasteResult sample_and_paste(const Frame& frame, const GtDatabase& db, std::span<const int> counts,
                             std::uint64_t seed) {
  if (counts.size() != db.by_class.size()) {
    throw ConfigError("sample counts cover " + std::to_string(counts.size()) +
                      " classes but the database has " + std::to_string(db.by_class.size()));
  }
  if (!db.by_class.empty() && db.size() > 0 && frame.cloud.attr_dim() != db.attr_dim) {
    throw DataError("frame and database point attribute widths differ");
  }
  PasteResult result;
  result.frame = frame;
  result.pasted_per_class.assign(counts.size(), 0);
  const bool track_counts = frame.point_counts.size() == frame.boxes.size();
  Rng rng(seed);

  for (std::size_t c = 0; c < counts.size(); ++c) {
    const auto& pool = db.by_class[c];
    if (counts[c] <= 0 || pool.empty()) continue;
    std::vector<std::size_t> picks(pool.size());
    std::iota(picks.begin(), picks.end(), 0);
    const std::size_t take = std::min(pool.size(), static_cast<std::size_t>(counts[c]));
    rng.shuffle_prefix(std::span<std::size_t>(picks), take);

    for (std::size_t t = 0; t < take; ++t) {
      const GtDatabaseEntry& entry = pool[picks[t]];
      bool overlaps = false;
      for (const Box3D& existing : result.frame.boxes) {
        if (iou_bev(existing, entry.box) > 0.0) {
          overlaps = true;
          break;
        }
      }
      if (overlaps) {
        ++result.rejected;
        continue;
      }
      const BoxFrame bf(entry.box);
      for (std::size_t i = 0; i < entry.local_points.size(); ++i) {
        result.frame.cloud.push_back(bf.to_sensor(entry.local_points.position(i)),
                                     entry.local_points.record(i).subspan(3));
      }
      result.frame.boxes.push_back(entry.box);
      if (track_counts) {
        result.frame.point_counts.push_back(static_cast<int>(entry.local_points.size()));
      }
      ++result.pasted_per_class[c];
    }
  }
  return result;
}

GlobalTransform draw_global_transform(std::uint64_t seed, const AugmentRanges& ranges) {
  Rng rng(seed);
  GlobalTransform t;
  t.flip_x = rng.uniform() < ranges.flip_probability;
  t.flip_y = rng.uniform() < ranges.flip_probability;
  t.rotation = rng.uniform(-ranges.max_rotation, ranges.max_rotation);
  t.scale = rng.uniform(ranges.min_scale, ranges.max_scale);
  return t;
}

Frame apply_global_transform(const Frame& frame, const GlobalTransform& transform) {
  Frame out = frame;
  const double c = std::cos(transform.rotation);
  const double s = std::sin(transform.rotation);
  const double k = transform.scale;
  auto move_point = [&](Vec3 p) {
    if (transform.flip_x) p.y = -p.y;
    if (transform.flip_y) p.x = -p.x;
    if (transform.rotation != 0.0) {
      p = {p.x * c - p.y * s, p.x * s + p.y * c, p.z};
    }
    if (k != 1.0) p = {p.x * k, p.y * k, p.z * k};
    return p;
  };
  for (std::size_t i = 0; i < out.cloud.size(); ++i) {
    out.cloud.set_position(i, move_point(out.cloud.position(i)));
  }
  for (Box3D& box : out.boxes) {
    box.center = move_point(box.center);
    double yaw = box.yaw;
    if (transform.flip_x) yaw = -yaw;
    if (transform.flip_y) yaw = std::numbers::pi - yaw;
    box.yaw = normalize_angle(yaw + transform.rotation);
    if (k != 1.0) box.dims = {box.dims.w * k, box.dims.l * k, box.dims.h * k};
  }
  return out;
}

Frame global_augment(const Frame& frame, std::uint64_t seed, const AugmentRanges& ranges) {
  return apply_global_transform(frame, draw_global_transform(seed, ranges));
}

}  // namespace cornerkit
