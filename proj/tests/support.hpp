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
// Helpers shared by the unit tests. Random draws here use the std
// distributions on purpose: test inputs do not need to be portable.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "cornerkit/geometry.hpp"

namespace cktest {

using cornerkit::Box3D;
using cornerkit::PointCloud;
using cornerkit::Vec3;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin() { return integer(0, 1) == 1; }
  std::mt19937_64& engine() { return eng_; }

  Box3D box(double extent = 40.0, int num_classes = 5) {
    Box3D b;
    b.center = {uniform(-extent, extent), uniform(-extent, extent), uniform(-1.0, 1.0)};
    b.dims = {uniform(0.4, 3.0), uniform(0.5, 6.0), uniform(0.8, 3.0)};
    b.yaw = uniform(-std::numbers::pi, std::numbers::pi);
    b.class_id = integer(0, num_classes - 1);
    return b;
  }

  // Points scattered around the box, about half of them inside.
  PointCloud points_near(const Box3D& b, int n, int attr_dim = 1) {
    PointCloud cloud(attr_dim);
    const double c = std::cos(b.yaw), s = std::sin(b.yaw);
    for (int i = 0; i < n; ++i) {
      const double lx = uniform(-0.7, 0.7) * b.dims.w * 1.4;
      const double ly = uniform(-0.7, 0.7) * b.dims.l * 1.4;
      const double lz = uniform(-0.7, 0.7) * b.dims.h * 1.4;
      std::vector<double> attrs(attr_dim);
      for (double& a : attrs) a = uniform(0.0, 1.0);
      cloud.push_back({b.center.x + lx * c - ly * s, b.center.y + lx * s + ly * c, b.center.z + lz},
                      attrs);
    }
    return cloud;
  }

 private:
  std::mt19937_64 eng_;
};

// Membership written straight from the half-space definition.
inline bool inside_oracle(const Vec3& p, const Box3D& b, double slack = 0.0) {
  const double dx = p.x - b.center.x, dy = p.y - b.center.y;
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double lx = dx * c + dy * s;
  const double ly = -dx * s + dy * c;
  const double lz = p.z - b.center.z;
  return std::abs(lx) <= b.dims.w / 2 + slack && std::abs(ly) <= b.dims.l / 2 + slack &&
         std::abs(lz) <= b.dims.h / 2 + slack;
}

}  // namespace cktest
