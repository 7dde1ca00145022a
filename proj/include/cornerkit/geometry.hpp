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
/// \brief Core 3D / bird's-eye-view types, box frame transforms and
/// point-in-box tests.
///
/// Two frames are used throughout:
///   sensor frame: the LiDAR coordinate system the cloud is expressed in;
///   box frame:    origin at the box center, rotated by -yaw, so that
///                 a point p maps to (p - c) * R with
///                 R = [[cos, -sin, 0], [sin, cos, 0], [0, 0, 1]]
///                 (row vector times matrix).
/// In the box frame the width w spans local x and the length l spans local y.
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace cornerkit {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct BoxDims {
  double w = 1.0;  // extent along box-frame x
  double l = 1.0;  // extent along box-frame y
  double h = 1.0;  // extent along z

  friend bool operator==(const BoxDims&, const BoxDims&) = default;
};

struct Box3D {
  Vec3 center;
  BoxDims dims;
  double yaw = 0.0;
  int class_id = 0;

  friend bool operator==(const Box3D&, const Box3D&) = default;
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Smallest absolute difference between two headings, in [0, pi].
double heading_difference(double a, double b);

/// Throws ConfigError unless dims are positive and every field is finite.
/// num_classes <= 0 skips the class-range check.
void validate_box(const Box3D& box, int num_classes = 0);

/// N x (3 + attr_dim) point records, row-major.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(int attr_dim) : attr_dim_(attr_dim) {}
  PointCloud(int attr_dim, std::vector<double> values);

  int attr_dim() const noexcept { return attr_dim_; }
  int stride() const noexcept { return 3 + attr_dim_; }
  std::size_t size() const noexcept { return values_.size() / stride(); }
  bool empty() const noexcept { return values_.empty(); }

  Vec3 position(std::size_t i) const {
    const double* p = &values_[i * stride()];
    return {p[0], p[1], p[2]};
  }
  void set_position(std::size_t i, const Vec3& p) {
    double* row = &values_[i * stride()];
    row[0] = p.x;
    row[1] = p.y;
    row[2] = p.z;
  }
  std::span<const double> record(std::size_t i) const {
    return {values_.data() + i * stride(), static_cast<std::size_t>(stride())};
  }

  void push_back(const Vec3& p, std::span<const double> attrs = {});
  void append(std::span<const double> record);
  void reserve(std::size_t n) { values_.reserve(n * stride()); }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  int attr_dim_ = 0;
  std::vector<double> values_;
};

/// Four BEV corners; index k lies in box-frame quadrant k:
/// 0: (-w/2, +l/2), 1: (+w/2, +l/2), 2: (+w/2, -l/2), 3: (-w/2, -l/2).
using CornerSetBEV = std::array<Point2, 4>;

/// Precomputed sensor->box transform for repeated use on many points.
class BoxFrame {
 public:
  explicit BoxFrame(const Box3D& box);

  Vec3 to_local(const Vec3& p) const noexcept {
    const double dx = p.x - center_.x;
    const double dy = p.y - center_.y;
    return {dx * cos_ + dy * sin_, -dx * sin_ + dy * cos_, p.z - center_.z};
  }

  Vec3 to_sensor(const Vec3& local) const noexcept {
    return {local.x * cos_ - local.y * sin_ + center_.x,
            local.x * sin_ + local.y * cos_ + center_.y, local.z + center_.z};
  }

  bool contains(const Vec3& p) const noexcept;

 private:
  Vec3 center_;
  BoxDims half_;
  double cos_;
  double sin_;
  double reach_sq_;  // squared BEV circumradius for quick rejection
};

/// Absolute slack applied to point-in-box comparisons so that surface points
/// stay inside after floating-point rigid transforms.
inline constexpr double kBoxBoundaryTolerance = 1e-9;

std::vector<Vec3> to_local(const PointCloud& points, const Box3D& box);
Vec3 to_local(const Vec3& point, const Box3D& box);
Vec3 to_sensor(const Vec3& local, const Box3D& box);

CornerSetBEV box_corners_bev(const Box3D& box);

/// Boundary-inclusive membership mask (up to kBoxBoundaryTolerance).
std::vector<bool> points_in_box(const PointCloud& points, const Box3D& box);

/// Indices of points inside the box, ascending.
std::vector<std::size_t> point_indices_in_box(const PointCloud& points, const Box3D& box);

}  // namespace cornerkit
