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
#include "cornerkit/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cornerkit/error.hpp"
#include "cornerkit/metrics.hpp"
#include "cornerkit/target_builder.hpp"

namespace cornerkit {

std::vector<Peak> extract_peaks(const Grid& heatmap, int k, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("peak threshold must be in [0, 1]");
  std::vector<Peak> peaks;
  for (int r = 0; r < heatmap.rows(); ++r) {
    for (int c = 0; c < heatmap.cols(); ++c) {
      for (int ch = 0; ch < heatmap.channels(); ++ch) {
        const double v = heatmap.at(r, c, ch);
        if (!(v > 0.0) || v < threshold) continue;
        bool is_max = true;
        for (int dr = -1; dr <= 1 && is_max; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if ((dr == 0 && dc == 0) || !heatmap.contains(r + dr, c + dc)) continue;
            if (heatmap.at(r + dr, c + dc, ch) >= v) {
              is_max = false;
              break;
            }
          }
        }
        if (is_max) peaks.push_back({r, c, ch, v});
      }
    }
  }
  // Scan order is already (row, col, channel), so a stable sort keeps ties in it.
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.score > b.score; });
  if (k > 0 && peaks.size() > static_cast<std::size_t>(k)) peaks.resize(static_cast<std::size_t>(k));
  return peaks;
}

DecodeResult decode_boxes(std::span<const Peak> peaks, const Grid& regression,
                          const GridSpec& spec) {
  const BevShape shape = bev_shape(spec);
  if (regression.rows() != shape.height || regression.cols() != shape.width ||
      regression.channels() != kRegChannels) {
    throw ShapeError("decode_boxes: regression grid " +
                     shape_string(regression.rows(), regression.cols(), regression.channels()) +
                     " does not match BEV shape " +
                     shape_string(shape.height, shape.width, kRegChannels));
  }
  DecodeResult out;
  for (const Peak& peak : peaks) {
    if (!regression.contains(peak.row, peak.col)) {
      throw ShapeError("peak outside the regression grid");
    }
    double v[kRegChannels];
    bool finite = true;
    for (int k = 0; k < kRegChannels; ++k) {
      v[k] = regression.at(peak.row, peak.col, k);
      finite = finite && std::isfinite(v[k]);
    }
    Detection det;
    if (finite) {
      const Point2 xy = cell_position(peak.row, peak.col, v[kRegOffsetX], v[kRegOffsetY], spec);
      det.box.center = {xy.x, xy.y, v[kRegZ]};
      det.box.dims = {std::exp(v[kRegLogW]), std::exp(v[kRegLogL]), std::exp(v[kRegLogH])};
      det.box.yaw = normalize_angle(std::atan2(v[kRegSin], v[kRegCos]));
      det.box.class_id = peak.channel;
      det.score = std::clamp(peak.score, 0.0, 1.0);
      const BoxDims& d = det.box.dims;
      finite = std::isfinite(d.w) && std::isfinite(d.l) && std::isfinite(d.h) && d.w > 0.0 &&
               d.l > 0.0 && d.h > 0.0;
    }
    if (!finite) {
      ++out.dropped_non_finite;
      continue;
    }
    out.detections.push_back(det);
  }
  return out;
}

std::vector<Detection> bev_nms(std::span<const Detection> detections, double iou_threshold,
                               bool class_agnostic) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw ConfigError("NMS IoU threshold must be in [0, 1]");
  }
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].score > detections[b].score;
  });
  std::vector<bool> suppressed(detections.size(), false);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (suppressed[order[i]]) continue;
    const Detection& keep = detections[order[i]];
    kept.push_back(keep);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t other = order[j];
      if (suppressed[other]) continue;
      if (!class_agnostic && detections[other].class_id() != keep.class_id()) continue;
      if (iou_bev(keep.box, detections[other].box) > iou_threshold) suppressed[other] = true;
    }
  }
  return kept;
}

}  // namespace cornerkit
