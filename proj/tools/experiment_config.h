// Copyright 2026 The Pairscale Authors.
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

#ifndef PAIRSCALE_TOOLS_EXPERIMENT_CONFIG_H_
#define PAIRSCALE_TOOLS_EXPERIMENT_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "pairscale/comparator.h"
#include "pairscale/inference.h"
#include "pairscale/observer.h"

namespace pairscale::tools {

inline constexpr std::string_view kConfigFormat = "pairscale-config/1";

struct SimulateSettings {
  size_t n = 15;
  DesignKind design = DesignKind::kFull;
  // Extra pairs on top of the chain; unset picks n / 2.
  std::optional<size_t> extra_pairs;
  size_t comparisons_per_pair = 30;
  // Standard deviation of the true scores.
  double spread = 1.0;
  // When positive, features.csv is written with this many columns; the
  // first one is the true score plus Gaussian noise.
  size_t feature_dim = 0;
  double feature_noise = 0.1;
  size_t histogram_bins = 10;
};

struct CalibrateSettings {
  // Pairs with fewer comparisons are left out of the calibration table.
  double min_comparisons = 1.0;
};

// Every setting a command may consume. Each command reads the sections it
// needs; the others are echoed unchanged.
struct ExperimentConfig {
  uint64_t seed = 0;
  double sigma_obs = kDefaultSigmaObs;
  // input_dim 0 takes the dimension from the training features.
  ModelArchitecture architecture{.input_dim = 0};
  TrainConfig train;
  InferenceConfig inference;
  SimulateSettings simulate;
  CalibrateSettings calibrate;
};

// Parses a JSON config on top of the defaults. Unknown keys, wrong types
// and invalid values throw UsageError naming the offending key path.
ExperimentConfig ParseExperimentConfig(std::string_view text,
                                       std::string_view source);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

// Copies the global seed and observer noise into the module configs.
// Call after all flag overrides.
void Resolve(ExperimentConfig& config);

// Resolved config with the command name and artifact format versions.
std::string ResolvedConfigJson(const ExperimentConfig& config,
                               std::string_view command);

}  // namespace pairscale::tools

#endif  // PAIRSCALE_TOOLS_EXPERIMENT_CONFIG_H_
