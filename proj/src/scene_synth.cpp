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
#include "cornerkit/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "cornerkit/error.hpp"
#include "cornerkit/random.hpp"

namespace cornerkit {
namespace {

struct Hit {
  double t = 0.0;
  FaceId face;
};

// Slab test in the box frame. The origin is assumed outside the box.
std::optional<Hit> intersect(const Box3D& box, const Vec3& origin, const Vec3& dir) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double dx = origin.x - box.center.x;
  const double dy = origin.y - box.center.y;
  const double o[3] = {dx * c + dy * s, -dx * s + dy * c, origin.z - box.center.z};
  const double d[3] = {dir.x * c + dir.y * s, -dir.x * s + dir.y * c, dir.z};
  const double half[3] = {box.dims.w / 2.0, box.dims.l / 2.0, box.dims.h / 2.0};

  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  FaceId face;
  for (int a = 0; a < 3; ++a) {
    if (std::fabs(d[a]) < 1e-15) {
      if (std::fabs(o[a]) > half[a]) return std::nullopt;
      continue;
    }
    double t1 = (-half[a] - o[a]) / d[a];
    double t2 = (half[a] - o[a]) / d[a];
    int side = -1;
    if (t1 > t2) {
      std::swap(t1, t2);
      side = 1;
    }
    if (t1 > t_near) {
      t_near = t1;
      face = {a, side};
    }
    t_far = std::min(t_far, t2);
  }
  if (!(t_near <= t_far) || !(t_near > 0.0)) return std::nullopt;
  return Hit{t_near, face};
}

Box3D make_box(double x, double y, double z, double w, double l, double h, double yaw, int cls) {
  return {{x, y, z}, {w, l, h}, yaw, cls};
}

}  // namespace

std::vector<double> SensorSpec::default_elevations() {
  std::vector<double> out;
  constexpr int kRings = 40;
  for (int i = 0; i < kRings; ++i) out.push_back(-0.25 + 0.5 * i / (kRings - 1));
  return out;
}

void validate(const SensorSpec& sensor) {
  if (sensor.azimuth_count < 1) throw ConfigError("azimuth count must be >= 1");
  if (sensor.elevations.empty()) throw ConfigError("at least one elevation ring is required");
  if (!(sensor.max_range > 0.0)) throw ConfigError("max range must be positive");
  if (!(sensor.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  if (!(sensor.azimuth_max > sensor.azimuth_min)) throw ConfigError("empty azimuth window");
  if (sensor.attr_dim < 0) throw ConfigError("attribute dimension must be >= 0");
}

RaycastResult raycast_scene(std::span<const Box3D> boxes, const SensorSpec& sensor) {
  validate(sensor);
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    validate_box(boxes[b]);
    if (BoxFrame(boxes[b]).contains(sensor.origin)) {
      throw DataError("sensor origin lies inside box " + std::to_string(b));
    }
  }
  RaycastResult out;
  out.cloud = PointCloud(sensor.attr_dim);
  out.rays_per_box.assign(boxes.size(), 0);
  Rng rng(sensor.seed);

  const double span = sensor.azimuth_max - sensor.azimuth_min;
  for (int ia = 0; ia < sensor.azimuth_count; ++ia) {
    const double az = sensor.azimuth_min + span * (ia + 0.5) / sensor.azimuth_count;
    for (double el : sensor.elevations) {
      const Vec3 dir{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
      double best_t = sensor.max_range;
      int best_box = -1;
      FaceId best_face;
      for (std::size_t b = 0; b < boxes.size(); ++b) {
        const auto hit = intersect(boxes[b], sensor.origin, dir);
        if (hit && hit->t <= sensor.max_range && (best_box < 0 || hit->t < best_t)) {
          best_t = hit->t;
          best_box = static_cast<int>(b);
          best_face = hit->face;
        }
      }
      if (best_box < 0) continue;
      double range = best_t;
      if (sensor.noise_sigma > 0.0) range += sensor.noise_sigma * rng.normal();
      out.cloud.push_back({sensor.origin.x + range * dir.x, sensor.origin.y + range * dir.y,
                           sensor.origin.z + range * dir.z});
      out.box_ids.push_back(best_box);
      out.faces.push_back(best_face);
      ++out.rays_per_box[best_box];
    }
  }
  return out;
}

std::vector<std::string> fixture_names() {
  return {"single-quadrant", "diagonal", "occluded", "far-sparse", "zero-point", "empty", "street"};
}

Fixture make_fixture(const std::string& name) {
  Fixture fx;
  fx.frame.id = name;
  SensorSpec& sensor = fx.sensor;
  std::vector<Box3D>& boxes = fx.frame.boxes;

  if (name == "single-quadrant") {
    // Narrow azimuth window onto the -x face, above the box's local x axis.
    boxes.push_back(make_box(10.0, 0.0, 0.0, 2.0, 4.0, 1.5, 0.0, 0));
    sensor.azimuth_min = std::atan2(0.3, 9.0);
    sensor.azimuth_max = std::atan2(1.9, 9.0);
    sensor.azimuth_count = 64;
    sensor.elevations.clear();
    for (int i = 0; i < 9; ++i) sensor.elevations.push_back(-0.06 + 0.015 * i);
  } else if (name == "diagonal") {
    boxes.push_back(make_box(12.0, 12.0, 0.0, 2.0, 4.5, 1.6, 0.3, 0));
  } else if (name == "occluded") {
    boxes.push_back(make_box(8.0, 0.0, 0.0, 2.0, 3.0, 2.0, 0.0, 0));
    boxes.push_back(make_box(16.0, 0.0, 0.0, 2.0, 2.5, 1.6, 0.0, 0));
  } else if (name == "far-sparse") {
    boxes.push_back(make_box(55.0, 20.0, 0.0, 0.6, 0.8, 1.7, 0.5, 3));
  } else if (name == "zero-point") {
    sensor.max_range = 70.0;
    boxes.push_back(make_box(10.0, 5.0, 0.0, 2.0, 4.0, 1.5, 0.1, 0));
    boxes.push_back(make_box(0.0, -72.0, 0.0, 2.0, 4.0, 1.5, 0.0, 0));
  } else if (name == "empty") {
    // no boxes
  } else if (name == "street") {
    boxes.push_back(make_box(9.0, 3.5, 0.0, 1.9, 4.4, 1.6, 0.05, 0));
    boxes.push_back(make_box(-14.0, -4.0, 0.0, 2.0, 4.6, 1.5, 3.0, 0));
    boxes.push_back(make_box(22.0, -6.0, 0.5, 2.8, 11.5, 3.2, 1.6, 1));
    boxes.push_back(make_box(-30.0, 12.0, 0.4, 2.6, 8.0, 3.0, -1.2, 2));
    boxes.push_back(make_box(6.0, -8.0, 0.0, 0.6, 0.7, 1.75, 0.7, 3));
    boxes.push_back(make_box(-5.0, 9.5, 0.0, 0.55, 0.65, 1.7, -2.2, 3));
    boxes.push_back(make_box(15.0, 14.0, 0.0, 0.7, 1.8, 1.6, 2.4, 4));
    boxes.push_back(make_box(-18.0, -16.0, 0.0, 0.7, 1.7, 1.6, -0.4, 4));
  } else {
    throw DataError("unknown fixture '" + name + "'");
  }

  fx.scan = raycast_scene(boxes, sensor);
  fx.frame.cloud = fx.scan.cloud;
  fx.frame.point_counts = fx.scan.rays_per_box;
  return fx;
}

}  // namespace cornerkit
