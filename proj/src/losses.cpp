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
#include "cornerkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cornerkit/error.hpp"
#include "cornerkit/target_builder.hpp"

namespace cornerkit {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 16;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

LossValue focal_loss(const Grid& pred, const Grid& target, const LossWeights& weights) {
  require_same_shape(pred, target, "focal_loss");
  const auto& p_all = pred.values();
  const auto& y_all = target.values();
  const std::size_t n = p_all.size();

  std::vector<double> terms(n);
  LossValue out;
  out.gradient = Grid(pred.rows(), pred.cols(), pred.channels());
  auto& grad = out.gradient.values();
  std::size_t positives = 0;

  const double a = weights.alpha;
  const double b = weights.beta;
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = p_all[i];
    const double p = std::clamp(raw, kFocalClamp, 1.0 - kFocalClamp);
    const bool clamped = p != raw;
    const double y = y_all[i];
    if (y == 1.0) {
      ++positives;
      const double one_minus = 1.0 - p;
      terms[i] = -std::pow(one_minus, a) * std::log(p);
      grad[i] = clamped ? 0.0
                        : a * std::pow(one_minus, a - 1.0) * std::log(p) -
                              std::pow(one_minus, a) / p;
    } else {
      const double reduce = std::pow(1.0 - y, b);
      const double log_neg = std::log(1.0 - p);
      terms[i] = -reduce * std::pow(p, a) * log_neg;
      grad[i] = clamped ? 0.0
                        : -reduce * (a * std::pow(p, a - 1.0) * log_neg -
                                     std::pow(p, a) / (1.0 - p));
    }
  }
  const double norm = static_cast<double>(std::max<std::size_t>(positives, 1));
  out.value = pairwise_sum(terms) / norm;
  for (double& g : grad) g /= norm;
  return out;
}

LossValue l1_loss(const Grid& pred, const Grid& target, const MaskGrid& mask) {
  require_same_shape(pred, target, "l1_loss");
  if (mask.rows() != pred.rows() || mask.cols() != pred.cols() || mask.channels() < 1 ||
      pred.channels() % mask.channels() != 0) {
    throw ShapeError("l1_loss: mask " + shape_string(mask.rows(), mask.cols(), mask.channels()) +
                     " does not gate prediction " +
                     shape_string(pred.rows(), pred.cols(), pred.channels()));
  }
  const int group = pred.channels() / mask.channels();
  std::size_t positives = 0;
  for (std::uint8_t m : mask.values()) positives += m != 0 ? 1 : 0;

  LossValue out;
  out.gradient = Grid(pred.rows(), pred.cols(), pred.channels());
  if (positives == 0) return out;

  const double inv = 1.0 / static_cast<double>(positives);
  std::vector<double> terms;
  terms.reserve(positives * static_cast<std::size_t>(group));
  for (int r = 0; r < pred.rows(); ++r) {
    for (int c = 0; c < pred.cols(); ++c) {
      for (int m = 0; m < mask.channels(); ++m) {
        if (mask.at(r, c, m) == 0) continue;
        for (int k = m * group; k < (m + 1) * group; ++k) {
          const double diff = pred.at(r, c, k) - target.at(r, c, k);
          terms.push_back(std::fabs(diff));
          out.gradient.at(r, c, k) = diff > 0.0 ? inv : (diff < 0.0 ? -inv : 0.0);
        }
      }
    }
  }
  out.value = pairwise_sum(terms) * inv;
  return out;
}

LossReport total_loss(const LossParts& parts, const LossWeights& weights) {
  LossReport report;
  report.parts = parts;
  report.total = parts.center_cls + weights.gamma * parts.center_reg +
                 weights.lambda * (parts.corner_cls + parts.corner_reg);
  return report;
}

LossReport evaluate_losses(const Predictions& pred, const TargetBundle& targets,
                           const LossWeights& weights) {
  LossValue center_cls = focal_loss(pred.center_heatmap, targets.centers.heatmap, weights);
  LossValue center_reg =
      l1_loss(pred.center_regression, targets.centers.regression, targets.centers.mask);
  LossValue corner_cls = focal_loss(pred.corner_heatmap, targets.corners.heatmap, weights);
  LossValue corner_reg =
      l1_loss(pred.corner_offsets, targets.corners.offsets, targets.corners.mask);

  LossReport report = total_loss(
      {center_cls.value, center_reg.value, corner_cls.value, corner_reg.value}, weights);
  auto scale = [](Grid& g, double s) {
    for (double& v : g.values()) v *= s;
  };
  scale(center_reg.gradient, weights.gamma);
  scale(corner_cls.gradient, weights.lambda);
  scale(corner_reg.gradient, weights.lambda);
  report.gradients = LossGradients{std::move(center_cls.gradient), std::move(center_reg.gradient),
                                   std::move(corner_cls.gradient), std::move(corner_reg.gradient)};
  return report;
}

}  // namespace cornerkit
