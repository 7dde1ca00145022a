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

#include <optional>

#include "cornerkit/geometry.hpp"

namespace cornerkit {

/// Scored box; the class lives in box.class_id.
struct Detection {
  Box3D box;
  double score = 0.0;

  int class_id() const noexcept { return box.class_id; }
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruth {
  Box3D box;
  // LiDAR returns inside the box; required for difficulty levels.
  std::optional<int> num_points;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

}  // namespace cornerkit
