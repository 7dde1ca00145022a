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

#include <filesystem>
#include <string>
#include <vector>

#include "cornerkit/augmentation.hpp"
#include "cornerkit/losses.hpp"
#include "cornerkit/metrics.hpp"
#include "cornerkit/target_builder.hpp"
#include "cornerkit/voxelizer.hpp"
#include "json.hpp"

namespace cornerkit {

enum class Dataset { kOnce, kWaymo };

Dataset parse_dataset(const std::string& name);

struct DecodeConfig {
  int max_peaks = 500;
  double score_threshold = 0.1;
  double nms_iou = 0.1;
  bool class_agnostic_nms = false;
};

struct Config {
  GridSpec grid;
  std::vector<std::string> classes;
  int attr_dim = 1;
  TargetConfig target;
  LossWeights loss;
  EvalConfig eval;
  std::vector<int> sample_counts;
  AugmentRanges augment;
  DecodeConfig decode;

  int class_id(const std::string& name) const;  // -1 if unknown
};

/// Defaults for a dataset: class table, range, voxel size, IoU thresholds and
/// database sample counts.
Config default_config(Dataset dataset);

/// Fields absent from the document keep the dataset defaults.
Config config_from_json(const nlohmann::json& doc, Dataset dataset = Dataset::kOnce);
nlohmann::json config_to_json(const Config& config);
Config load_config(const std::filesystem::path& path, Dataset dataset = Dataset::kOnce);

/// Throws ConfigError on any inconsistent section.
void validate(const Config& config);

nlohmann::json report_to_json(const EvalReport& report);

/// Plain-text table: one row per class with overall and bucket APs.
std::string format_report(const EvalReport& report);

}  // namespace cornerkit
