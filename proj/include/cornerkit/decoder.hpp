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

#include <span>
#include <vector>

#include "cornerkit/detection.hpp"
#include "cornerkit/grid.hpp"
#include "cornerkit/voxelizer.hpp"

namespace cornerkit {

struct Peak {
  int row = 0;
  int col = 0;
  int channel = 0;
  double score = 0.0;

  friend bool operator==(const Peak&, const Peak&) = default;
};

/// Pixels that strictly exceed every in-bounds neighbour of their 3x3 window
/// in the same channel, have a positive score and score >= threshold. At most
/// k peaks are returned (k <= 0: all), by descending score with ties ordered
/// by (row, col, channel).
std::vector<Peak> extract_peaks(const Grid& heatmap, int k, double threshold);

struct DecodeResult {
  std::vector<Detection> detections;
  int dropped_non_finite = 0;
};

/// Inverts the center regression at each peak: position from the cell and
/// offset, dims from exp of the log channels, yaw = atan2(sin, cos). The
/// class comes from the peak channel.
DecodeResult decode_boxes(std::span<const Peak> peaks, const Grid& regression,
                          const GridSpec& spec);

/// Greedy rotated-BEV NMS: detections are visited by descending score (ties
/// keep input order) and suppress later ones whose BEV IoU exceeds the
/// threshold. Class-wise unless class_agnostic.
std::vector<Detection> bev_nms(std::span<const Detection> detections, double iou_threshold,
                               bool class_agnostic = false);

}  // namespace cornerkit
