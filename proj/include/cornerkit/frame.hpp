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

#include <string>
#include <vector>

#include "cornerkit/geometry.hpp"

namespace cornerkit {

struct Frame {
  std::string id;
  PointCloud cloud;
  std::vector<Box3D> boxes;
  // Interior point count per box; empty when unknown.
  std::vector<int> point_counts;

  friend bool operator==(const Frame&, const Frame&) = default;
};

}  // namespace cornerkit
