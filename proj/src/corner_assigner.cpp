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
#include "cornerkit/corner_assigner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cornerkit/error.hpp"

namespace cornerkit {

const char* corner_type_name(CornerType type) {
  switch (type) {
    case CornerType::kInvisible:
      return "ivc";
    case CornerType::kPartlyVisibleLength:
      return "pvcl";
    case CornerType::kPartlyVisibleWidth:
      return "pvcw";
    case CornerType::kVisible:
      return "vc";
  }
  return "unknown";
}

QuadrantHistogram quadrant_histogram(std::span<const Vec3> local_points) {
  QuadrantHistogram h;
  for (const Vec3& p : local_points) {
    if (p.x < 0 && p.y > 0) {
      ++h.q[0];
    } else if (p.x > 0 && p.y > 0) {
      ++h.q[1];
    } else if (p.x > 0 && p.y < 0) {
      ++h.q[2];
    } else if (p.x < 0 && p.y < 0) {
      ++h.q[3];
    }
  }
  return h;
}

int visible_quadrant(const QuadrantHistogram& histogram) {
  const auto& q = histogram.q;
  int populated = 0;
  for (int v : q) populated += v > 0 ? 1 : 0;

  std::array<int, 4> score = q;
  if (populated > 2) {
    score = {q[0] + q[1] + q[3], q[1] + q[0] + q[2], q[2] + q[1] + q[3], q[3] + q[2] + q[0]};
  }
  int best = 0;
  for (int k = 1; k < 4; ++k) {
    if (score[k] > score[best]) best = k;
  }
  return best;
}

const Point2& CornerSelection::corner(CornerType type) const {
  switch (type) {
    case CornerType::kInvisible:
      return ivc;
    case CornerType::kPartlyVisibleLength:
      return pvcl;
    case CornerType::kPartlyVisibleWidth:
      return pvcw;
    case CornerType::kVisible:
      return vc;
  }
  throw Error("invalid corner type");
}

CornerSelection select_corners(const Box3D& box, const QuadrantHistogram& histogram,
                               int interior_points) {
  const CornerSetBEV corners = box_corners_bev(box);
  CornerSelection sel;
  sel.histogram = histogram;
  sel.interior_points = interior_points;
  sel.degenerate = interior_points == 0;
  sel.max_quadrant = visible_quadrant(histogram);

  const auto& row = kAuxiliaryCornerTable[sel.max_quadrant];
  sel.corner_indices = {row[0], row[1], row[2], sel.max_quadrant};
  sel.ivc = corners[row[0]];
  sel.pvcl = corners[row[1]];
  sel.pvcw = corners[row[2]];
  sel.vc = corners[sel.max_quadrant];
  return sel;
}

CornerSelection select_corners(const Box3D& box, const PointCloud& points) {
  validate_box(box);
  const BoxFrame frame(box);
  std::vector<Vec3> local;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 p = points.position(i);
    if (frame.contains(p)) local.push_back(frame.to_local(p));
  }
  return select_corners(box, quadrant_histogram(local), static_cast<int>(local.size()));
}

namespace {

// Points bucketed on a coarse BEV grid so each box only visits nearby cells.
class BevBuckets {
 public:
  explicit BevBuckets(const PointCloud& cloud) {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3 p = cloud.position(i);
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    if (!(x1 >= x0)) return;  // no finite points
    x0_ = x0;
    y0_ = y0;
    constexpr int kMaxCells = 512;
    cell_ = std::max({2.0, (x1 - x0) / kMaxCells, (y1 - y0) / kMaxCells});
    nx_ = static_cast<int>((x1 - x0) / cell_) + 1;
    ny_ = static_cast<int>((y1 - y0) / cell_) + 1;
    std::vector<int> cell_of(cloud.size(), -1);
    start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3 p = cloud.position(i);
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      cell_of[i] = flat(col(p.x), row(p.y));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    order_.resize(start_.back());
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (cell_of[i] >= 0) order_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
    }
  }

  // Calls fn(point index) for every point whose cell meets the disc.
  template <typename Fn>
  void visit(double cx, double cy, double radius, Fn&& fn) const {
    if (nx_ == 0) return;
    const int c0 = col(cx - radius), c1 = col(cx + radius);
    const int r0 = row(cy - radius), r1 = row(cy + radius);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const int f = flat(c, r);
        for (std::uint32_t k = start_[f]; k < start_[f + 1]; ++k) fn(order_[k]);
      }
    }
  }

 private:
  int col(double x) const { return std::clamp(static_cast<int>(std::floor((x - x0_) / cell_)), 0, nx_ - 1); }
  int row(double y) const { return std::clamp(static_cast<int>(std::floor((y - y0_) / cell_)), 0, ny_ - 1); }
  int flat(int c, int r) const { return r * nx_ + c; }

  double x0_ = 0, y0_ = 0, cell_ = 1;
  int nx_ = 0, ny_ = 0;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> order_;
};

}  // namespace

std::vector<CornerSelection> assign_frame(std::span<const Box3D> boxes, const PointCloud& cloud) {
  std::vector<CornerSelection> out;
  out.reserve(boxes.size());
  if (boxes.size() < 4) {
    for (const Box3D& box : boxes) out.push_back(select_corners(box, cloud));
    return out;
  }
  const BevBuckets buckets(cloud);
  std::vector<Vec3> local;
  for (const Box3D& box : boxes) {
    validate_box(box);
    const BoxFrame frame(box);
    local.clear();
    const double reach = 0.5 * std::hypot(box.dims.w, box.dims.l) + kBoxBoundaryTolerance;
    buckets.visit(box.center.x, box.center.y, reach, [&](std::uint32_t i) {
      const Vec3 p = cloud.position(i);
      if (frame.contains(p)) local.push_back(frame.to_local(p));
    });
    out.push_back(select_corners(box, quadrant_histogram(local), static_cast<int>(local.size())));
  }
  return out;
}

}  // namespace cornerkit
