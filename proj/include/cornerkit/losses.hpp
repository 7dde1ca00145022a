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
#include <span>

#include "cornerkit/grid.hpp"

namespace cornerkit {

struct LossWeights {
  double gamma = 0.25;   // center regression weight
  double lambda = 0.25;  // auxiliary corner weight
  double alpha = 2.0;    // focal exponent on the prediction
  double beta = 4.0;     // penalty-reduction exponent on the target
};

inline constexpr double kFocalClamp = 1e-7;

struct LossValue {
  double value = 0.0;
  Grid gradient;  // d value / d prediction, same shape as the prediction
};

/// Penalty-reduced focal loss over a heatmap stack. Predictions are clamped
/// to [eps, 1 - eps]; the gradient is zero where the clamp is active.
/// Positives are pixels with target exactly 1; the sum is divided by
/// max(positives, 1).
LossValue focal_loss(const Grid& pred, const Grid& target, const LossWeights& weights = {});

/// Masked L1: sum of |target - pred| over masked pixels divided by the number
/// of mask-positive entries. The mask may have fewer channels than pred, in
/// which case each mask channel gates pred.channels() / mask.channels()
/// consecutive prediction channels. The subgradient at a tie is 0.
LossValue l1_loss(const Grid& pred, const Grid& target, const MaskGrid& mask);

struct LossParts {
  double center_cls = 0.0;
  double center_reg = 0.0;
  double corner_cls = 0.0;
  double corner_reg = 0.0;
};

struct LossGradients {
  Grid center_heatmap;
  Grid center_regression;
  Grid corner_heatmap;
  Grid corner_offsets;
};

struct LossReport {
  double total = 0.0;
  LossParts parts;
  std::optional<LossGradients> gradients;
};

/// total = center_cls + gamma * center_reg + lambda * (corner_cls + corner_reg)
LossReport total_loss(const LossParts& parts, const LossWeights& weights = {});

struct Predictions {
  Grid center_heatmap;
  Grid center_regression;
  Grid corner_heatmap;
  Grid corner_offsets;
};

struct TargetBundle;

/// Evaluates all four terms against a target bundle; gradients of the total
/// (already scaled by the loss weights) are attached.
LossReport evaluate_losses(const Predictions& pred, const TargetBundle& targets,
                           const LossWeights& weights = {});

/// Order-fixed pairwise summation.
double pairwise_sum(std::span<const double> values);

}  // namespace cornerkit
