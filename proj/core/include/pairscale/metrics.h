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

#ifndef PAIRSCALE_METRICS_H_
#define PAIRSCALE_METRICS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairscale/scaling.h"

namespace pairscale {

// Correlations return nullopt for degenerate input (a constant vector),
// never NaN. Inputs must have equal lengths >= 2.
std::optional<double> Plcc(std::span<const double> x, std::span<const double> y);
// Pearson correlation of average ranks.
std::optional<double> Srcc(std::span<const double> x, std::span<const double> y);
// Kendall tau-b, O(n log n).
std::optional<double> Krcc(std::span<const double> x, std::span<const double> y);

// 1-based ranks, ties get the average of the ranks they span.
std::vector<double> AverageRanks(std::span<const double> x);

// Mean absolute error after shifting predicted onto the reference mean.
double MaeAligned(const JodScale& predicted, const JodScale& reference);

struct Aggregate {
  // Lower-middle order statistic M_(s/2) for even counts.
  double median = 0.0;
  double mean = 0.0;
  // 1.96 * sample sd / sqrt(s).
  double moe = 0.0;
  size_t count = 0;
  // Set for a single scene, where no spread can be estimated.
  bool degenerate = false;
};

// Throws std::invalid_argument on empty input.
Aggregate AggregateValues(std::span<const double> values);

struct SceneMetrics {
  std::optional<double> srcc;
  std::optional<double> plcc;
  std::optional<double> krcc;
  double mae = 0.0;
};

SceneMetrics EvaluateScene(const JodScale& predicted, const JodScale& truth);

struct MetricsReport {
  std::map<std::string, SceneMetrics> per_scene;
  // Keyed by metric name (srcc, plcc, krcc, mae). Absent when every scene
  // was degenerate for that metric.
  std::map<std::string, std::optional<Aggregate>> aggregates;
};

MetricsReport BuildReport(std::map<std::string, SceneMetrics> per_scene);

inline constexpr size_t kCalibrationBins = 6;

struct CalibrationBin {
  double edge_lo = 0.0;
  double edge_hi = 0.0;
  size_t count = 0;
  std::optional<double> mean_prediction;
  std::vector<size_t> prediction_histogram;
};

struct CalibrationHistogram {
  std::vector<CalibrationBin> bins;
};

// Groups records by ground-truth probability into equal-width bins (same
// convention as ProbabilityHistogram) and summarizes the predictions in
// each.
CalibrationHistogram Calibration(std::span<const double> predictions,
                                 std::span<const double> ground_truth,
                                 size_t bins = kCalibrationBins,
                                 size_t prediction_bins = 10);

}  // namespace pairscale

#endif  // PAIRSCALE_METRICS_H_
