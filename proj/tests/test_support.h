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

// Shared fixtures and independent oracles for the test suites. Nothing in
// here calls the code paths it is used to check.

#ifndef PAIRSCALE_TESTS_TEST_SUPPORT_H_
#define PAIRSCALE_TESTS_TEST_SUPPORT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pairscale/comparator.h"
#include "pairscale/comparison_matrix.h"
#include "pairscale/scaling.h"

namespace pairscale::testing {

std::vector<std::string> MakeIds(size_t n, const std::string& prefix = "item");

// n scores drawn from N(0, spread^2).
std::vector<double> RandomScores(size_t n, double spread, uint64_t seed);

// Random valid matrix; every unordered pair is observed with probability
// density, counts uniform in [1, max_count] per direction (0 allowed when
// allow_zero is set).
ComparisonMatrix RandomMatrix(size_t n, double density, int max_count,
                              bool allow_zero, uint64_t seed);

// Inverse standard normal CDF from Boost.Math.
double BoostNormalQuantile(double p);
double BoostNormalCdf(double x);

// Thurstone log-likelihood written directly from the definition with
// Boost's normal CDF.
double ReferenceLogLikelihood(const std::vector<double>& scores,
                              const ComparisonMatrix& matrix, double sigma_obs);

// Exhaustive search of ReferenceLogLikelihood over a 3-item zero-mean
// lattice with the given step inside [-box, box]^3.
std::vector<double> GridSearchThreeItems(const ComparisonMatrix& matrix,
                                         double step, double box,
                                         double sigma_obs);

// Kendall tau-b by counting all O(n^2) pairs; NaN when degenerate.
double BruteForceTauB(std::span<const double> x, std::span<const double> y);
// Spearman via ranks counted per element (O(n^2)); NaN when degenerate.
double BruteForceSpearman(std::span<const double> x, std::span<const double> y);

// Random model with the given layer widths (input first, embedding last)
// and non-zero biases, so every parameter carries gradient.
ComparatorModel RandomModel(const std::vector<size_t>& widths, uint64_t seed);

// Random batch of records over num_items items with dim features each.
TrainBatch RandomBatch(size_t num_records, size_t num_items, size_t dim,
                       uint64_t seed);

// True when central differences with step epsilon can resolve every
// gradient entry: no ReLU pre-activation of any batch item lies within
// kink_margin of zero, and every entry of grad is either exactly zero or at
// least min_gradient in magnitude.
bool IsSmoothForGradCheck(const ComparatorModel& model, const TrainBatch& batch,
                          const ComparatorModel& grad, double kink_margin,
                          double min_gradient);

// Synthetic scene: items whose first feature is true score plus noise, the
// rest pure noise.
struct SyntheticScene {
  std::vector<double> true_scores;
  ItemSet items;
  ComparisonMatrix matrix;
};

SyntheticScene MakeScene(const std::string& name, size_t n, size_t dim,
                         double spread, double feature_noise,
                         size_t comparisons_per_pair, uint64_t seed);

JodScale ZeroMeanScale(const std::vector<std::string>& ids,
                       const std::vector<double>& scores);

struct CommandResult {
  int exit_code = -1;
  // stdout and stderr, interleaved.
  std::string output;
};

// Runs a shell command line and captures its exit code and output.
CommandResult RunCommand(const std::string& command_line);

// Empty directory under the system temp dir, unique to this process.
std::filesystem::path FreshDir(const std::string& name);

}  // namespace pairscale::testing

#endif  // PAIRSCALE_TESTS_TEST_SUPPORT_H_
