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
#include "cornerkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cornerkit/error.hpp"

namespace cornerkit {

double normalize_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle, kTwoPi);
  if (wrapped > std::numbers::pi) {
    wrapped -= kTwoPi;
  } else if (wrapped <= -std::numbers::pi) {
    wrapped += kTwoPi;
  }
  return wrapped;
}

double heading_difference(double a, double b) {
  const double diff = std::fabs(normalize_angle(a) - normalize_angle(b));
  return std::min(diff, 2.0 * std::numbers::pi - diff);
}

void validate_box(const Box3D& box, int num_classes) {
  const bool finite = std::isfinite(box.center.x) && std::isfinite(box.center.y) &&
                      std::isfinite(box.center.z) && std::isfinite(box.dims.w) &&
                      std::isfinite(box.dims.l) && std::isfinite(box.dims.h) &&
                      std::isfinite(box.yaw);
  if (!finite) throw ConfigError("box has non-finite fields");
  if (!(box.dims.w > 0.0 && box.dims.l > 0.0 && box.dims.h > 0.0)) {
    throw ConfigError("box dimensions must be positive");
  }
  if (box.class_id < 0 || (num_classes > 0 && box.class_id >= num_classes)) {
    throw ConfigError("box class id " + std::to_string(box.class_id) + " out of range");
  }
}

PointCloud::PointCloud(int attr_dim, std::vector<double> values)
    : attr_dim_(attr_dim), values_(std::move(values)) {
  if (attr_dim < 0) throw ConfigError("attribute dimension must be non-negative");
  if (values_.size() % static_cast<std::size_t>(stride()) != 0) {
    throw ShapeError("point buffer length " + std::to_string(values_.size()) +
                     " is not a multiple of the record width " + std::to_string(stride()));
  }
}

void PointCloud::push_back(const Vec3& p, std::span<const double> attrs) {
  values_.push_back(p.x);
  values_.push_back(p.y);
  values_.push_back(p.z);
  for (int k = 0; k < attr_dim_; ++k) {
    values_.push_back(static_cast<std::size_t>(k) < attrs.size() ? attrs[k] : 0.0);
  }
}

void PointCloud::append(std::span<const double> record) {
  if (record.size() != static_cast<std::size_t>(stride())) {
    throw ShapeError("point record has " + std::to_string(record.size()) +
                     " values, expected " + std::to_string(stride()));
  }
  values_.insert(values_.end(), record.begin(), record.end());
}

BoxFrame::BoxFrame(const Box3D& box)
    : center_(box.center),
      half_{box.dims.w / 2.0, box.dims.l / 2.0, box.dims.h / 2.0},
      cos_(std::cos(box.yaw)),
      sin_(std::sin(box.yaw)) {
  const double rx = half_.w + kBoxBoundaryTolerance;
  const double ry = half_.l + kBoxBoundaryTolerance;
  // Slightly inflated so the prefilter never rejects a point the exact test
  // would accept.
  reach_sq_ = (rx * rx + ry * ry) * (1.0 + 1e-9) + 1e-12;
}

bool BoxFrame::contains(const Vec3& p) const noexcept {
  const double dx = p.x - center_.x;
  const double dy = p.y - center_.y;
  if (dx * dx + dy * dy > reach_sq_) return false;
  const Vec3 local = to_local(p);
  return std::fabs(local.x) <= half_.w + kBoxBoundaryTolerance &&
         std::fabs(local.y) <= half_.l + kBoxBoundaryTolerance &&
         std::fabs(local.z) <= half_.h + kBoxBoundaryTolerance;
}

std::vector<Vec3> to_local(const PointCloud& points, const Box3D& box) {
  const BoxFrame frame(box);
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out.push_back(frame.to_local(points.position(i)));
  return out;
}

Vec3 to_local(const Vec3& point, const Box3D& box) { return BoxFrame(box).to_local(point); }

Vec3 to_sensor(const Vec3& local, const Box3D& box) { return BoxFrame(box).to_sensor(local); }

CornerSetBEV box_corners_bev(const Box3D& box) {
  constexpr std::array<std::array<double, 2>, 4> kSigns{{{-1, 1}, {1, 1}, {1, -1}, {-1, -1}}};
  const BoxFrame frame(box);
  CornerSetBEV corners;
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec3 local{kSigns[k][0] * box.dims.w / 2.0, kSigns[k][1] * box.dims.l / 2.0, 0.0};
    const Vec3 p = frame.to_sensor(local);
    corners[k] = {p.x, p.y};
  }
  return corners;
}

std::vector<bool> points_in_box(const PointCloud& points, const Box3D& box) {
  const BoxFrame frame(box);
  std::vector<bool> mask(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) mask[i] = frame.contains(points.position(i));
  return mask;
}

std::vector<std::size_t> point_indices_in_box(const PointCloud& points, const Box3D& box) {
  const BoxFrame frame(box);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (frame.contains(points.position(i))) out.push_back(i);
  }
  return out;
}

}  // namespace cornerkit
