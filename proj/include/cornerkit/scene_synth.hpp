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
/// \brief Deterministic ray-cast LiDAR scenes with partial object visibility.
#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cornerkit/frame.hpp"
#include "cornerkit/geometry.hpp"

namespace cornerkit {

struct SensorSpec {
  Vec3 origin{0.0, 0.0, 0.0};
  int azimuth_count = 2048;
  double azimuth_min = -std::numbers::pi;
  double azimuth_max = std::numbers::pi;
  std::vector<double> elevations = default_elevations();
  double max_range = 200.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  int attr_dim = 1;  // attributes are zero-filled

  /// 40 rings evenly spaced over [-0.25, 0.25] rad.
  static std::vector<double> default_elevations();
};

void validate(const SensorSpec& sensor);

/// Box face hit by a ray: axis 0/1/2 = box-frame x/y/z, side -1 or +1.
struct FaceId {
  int axis = 0;
  int side = 0;

  friend bool operator==(const FaceId&, const FaceId&) = default;
};

struct RaycastResult {
  PointCloud cloud;
  std::vector<int> box_ids;   // per point
  std::vector<FaceId> faces;  // per point
  std::vector<int> rays_per_box;
};

/// One ray per (azimuth, elevation), azimuth-major. The nearest box face
/// crossing within max_range yields a point; the range is perturbed by
/// Gaussian noise. Throws DataError if the origin lies inside a box.
RaycastResult raycast_scene(std::span<const Box3D> boxes, const SensorSpec& sensor);

inline constexpr int kFixtureVersion = 1;

/// Names accepted by make_fixture.
std::vector<std::string> fixture_names();

struct Fixture {
  Frame frame;
  SensorSpec sensor;
  RaycastResult scan;
};

/// Canonical frames: "single-quadrant", "diagonal", "occluded", "far-sparse",
/// "zero-point", "empty" and "street". Throws DataError for unknown names.
Fixture make_fixture(const std::string& name);

}  // namespace cornerkit
