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

#ifndef PAIRSCALE_TOOLS_COMMANDS_H_
#define PAIRSCALE_TOOLS_COMMANDS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace pairscale::tools {

using Path = std::filesystem::path;

// Options every command accepts. Flags override the config file.
struct CommonOptions {
  std::optional<Path> config;
  std::optional<uint64_t> seed;
};

struct ScaleOptions {
  CommonOptions common;
  Path input;
  Path output;
  std::optional<std::string> method;
};

struct TrainOptions {
  CommonOptions common;
  Path manifest;
  std::string attribute;
  Path out;
  std::optional<size_t> epochs;
  std::optional<double> threshold;
};

struct InferOptions {
  CommonOptions common;
  Path model;
  Path items;
  Path out;
  std::optional<Path> emit_matrix;
  std::optional<std::string> query;
  std::optional<Path> refs;
  std::optional<std::string> strategy;
  std::optional<std::string> scaler;
  std::optional<double> comparisons;
  std::optional<size_t> budget;
};

struct EvalOptions {
  CommonOptions common;
  Path pred;
  Path truth;
  Path out;
};

struct SimulateOptions {
  CommonOptions common;
  std::optional<size_t> n;
  std::optional<std::string> design;
  std::optional<size_t> extra_pairs;
  std::optional<size_t> k;
  std::optional<double> sigma;
  std::optional<double> spread;
  std::optional<size_t> feature_dim;
  std::optional<double> feature_noise;
  std::optional<size_t> histogram_bins;
  Path out;
};

struct CalibrateOptions {
  CommonOptions common;
  Path model;
  Path manifest;
  std::optional<std::string> attribute;
  std::optional<double> min_comparisons;
  Path out;
};

// Each command writes its artifacts plus a resolved-config echo and
// throws UsageError or DataError on failure.
void RunScale(const ScaleOptions& options);
void RunTrain(const TrainOptions& options);
void RunInfer(const InferOptions& options);
void RunEval(const EvalOptions& options);
void RunSimulate(const SimulateOptions& options);
void RunCalibrate(const CalibrateOptions& options);

// Echo location for a file artifact: "<dir>/<stem>.config.json".
Path ConfigEchoPath(const Path& artifact);

}  // namespace pairscale::tools

#endif  // PAIRSCALE_TOOLS_COMMANDS_H_
