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

#ifndef PAIRSCALE_OBSERVER_H_
#define PAIRSCALE_OBSERVER_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pairscale/comparison_matrix.h"

namespace pairscale {

// Observation noise per condition such that a 1-JOD score difference maps
// to a 75% preference: 1 / (sqrt(2) * InverseNormalCdf(0.75)).
inline constexpr double kDefaultSigmaObs = 1.0483580825075305;

// Thurstone Case V observer: each condition is perceived with independent
// Gaussian noise of standard deviation sigma_obs.
struct ObserverConfig {
  double sigma_obs = kDefaultSigmaObs;
  uint64_t rng_seed = 0;
};

// Probability that an item scoring score_diff JOD above another is
// preferred: Phi(score_diff / (sigma_obs * sqrt(2))).
double LinkProbability(double score_diff, double sigma_obs = kDefaultSigmaObs);

// Inverse of LinkProbability. p must lie in (0, 1).
double LinkScoreDifference(double p, double sigma_obs = kDefaultSigmaObs);

enum class DesignKind { kFull, kChainPlusRandom };

std::string_view DesignKindName(DesignKind kind);
// Throws UsageError for unknown names.
DesignKind ParseDesignKind(std::string_view name);

using ItemPair = std::pair<size_t, size_t>;

struct Design {
  DesignKind kind = DesignKind::kFull;
  size_t num_items = 0;
  // Unordered pairs stored with first < second.
  std::vector<ItemPair> pairs;
  size_t comparisons_per_pair = 1;
};

// full: all n(n-1)/2 pairs. chain_plus_random: the n-1 adjacent pairs
// (i, i+1) followed by extra_random_pairs distinct non-adjacent pairs drawn
// from seed, so the graph is connected by construction. Throws
// std::invalid_argument when n < 2 or when more extra pairs are requested
// than there are non-adjacent pairs.
Design MakeDesign(DesignKind kind, size_t n, size_t extra_random_pairs,
                  size_t comparisons_per_pair, uint64_t seed);

// True when the pairs connect all num_items items.
bool IsConnected(size_t num_items, const std::vector<ItemPair>& pairs);

struct SimulatedMatrix {
  ComparisonMatrix matrix;
  // False when the design leaves the comparison graph disconnected.
  bool connected = true;
};

// Draws comparisons_per_pair forced-choice outcomes for every design pair
// from the observer model and accumulates win counts. ids and true_scores
// must have num_items entries.
SimulatedMatrix SimulateMatrix(const std::vector<std::string>& ids,
                               const std::vector<double>& true_scores,
                               const Design& design,
                               const ObserverConfig& config);

// Matrix with fractional counts c * p and c * (1 - p) from exact link
// probabilities; no sampling noise.
ComparisonMatrix ExpectedMatrix(const std::vector<std::string>& ids,
                                const std::vector<double>& true_scores,
                                const std::vector<ItemPair>& pairs,
                                double comparisons, double sigma_obs);

}  // namespace pairscale

#endif  // PAIRSCALE_OBSERVER_H_
