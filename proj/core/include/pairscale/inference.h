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

#ifndef PAIRSCALE_INFERENCE_H_
#define PAIRSCALE_INFERENCE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pairscale/comparator.h"
#include "pairscale/comparison_matrix.h"
#include "pairscale/observer.h"
#include "pairscale/scaling.h"

namespace pairscale {

enum class PairStrategy { kFull, kChainPlusRandom, kActive };
enum class ScalerKind { kTrueSkill, kMle };
enum class SingleMode { kFixedReferences, kRescale };

std::string_view PairStrategyName(PairStrategy s);
PairStrategy ParsePairStrategy(std::string_view name);
std::string_view ScalerKindName(ScalerKind s);
ScalerKind ParseScalerKind(std::string_view name);
std::string_view SingleModeName(SingleMode m);
SingleMode ParseSingleMode(std::string_view name);

struct InferenceConfig {
  // Average comparison count c: a predicted pair becomes counts c*p and
  // c*(1-p).
  double c_comparisons = 30.0;
  PairStrategy pair_strategy = PairStrategy::kFull;
  ScalerKind scaler = ScalerKind::kTrueSkill;
  // Pairs to query for chain_plus_random and active; 0 picks
  // (n - 1) + n / 2.
  size_t budget = 0;
  // Pairs chosen per active round before the ratings are refreshed.
  size_t active_round_size = 1;
  size_t trueskill_passes = 1;
  TrueSkillParams trueskill;
  MleScalerConfig mle;
  SingleMode single_mode = SingleMode::kFixedReferences;
  uint64_t seed = 0;
};

size_t DefaultBudget(size_t n);

// Fills exactly the requested pairs with c*p and c*(1-p), p = Forward(i, j).
// Throws DataError when an item in a pair has no features.
ComparisonMatrix PredictMatrix(const ComparatorModel& model,
                               const ItemSet& items,
                               const std::vector<ItemPair>& pairs,
                               double c_comparisons);

// Runs the configured scaler; returns zero-mean scores.
JodScale ScaleMatrix(const ComparisonMatrix& matrix,
                     const InferenceConfig& config);

// Pair selection.
//   full: every pair.
//   chain_plus_random: MakeDesign with budget - (n - 1) random extras.
//   active: a chain over the items sorted by current mu (n - 1 pairs),
//     then greedy picks: among the n unselected pairs with the smallest
//     |mu_i - mu_j| take the one with the largest sigma_i^2 + sigma_j^2.
//     After each pick the outcome-averaged TrueSkill update is applied to
//     a scratch copy of the state so later picks see the reduced
//     uncertainty. Ties go to the lexicographically smallest (i, j).
// Throws std::invalid_argument when budget < n - 1 for active or
// chain_plus_random.
std::vector<ItemPair> SelectPairs(PairStrategy strategy, size_t n,
                                  const TrueSkillState& state, size_t budget,
                                  uint64_t seed);

// Greedy part of active selection: count pairs not in exclude.
std::vector<ItemPair> GreedyActivePairs(const TrueSkillState& state,
                                        const std::vector<ItemPair>& exclude,
                                        size_t count);

// Outcome of comparing items (i, j): (wins_i, wins_j).
using PairObserver = std::function<std::pair<double, double>(size_t, size_t)>;

struct ActiveSamplingResult {
  std::vector<ItemPair> pairs;
  ComparisonMatrix matrix;
  TrueSkillState state;
};

// Sequential active sampling: the chain over the initial state, then rounds
// of round_size greedy picks, each round observed and replayed into the
// TrueSkill state before the next selection.
ActiveSamplingResult RunActiveSampling(const std::vector<std::string>& ids,
                                       size_t budget,
                                       const PairObserver& observe,
                                       const TrueSkillParams& params,
                                       size_t round_size, uint64_t seed);

// Multi-item inference: select pairs, predict the matrix, scale it.
JodScale ScoreMulti(const ComparatorModel& model, const ItemSet& items,
                    const InferenceConfig& config,
                    ComparisonMatrix* predicted_matrix = nullptr);

// One reference with an established score.
struct Reference {
  Item item;
  double score = 0.0;
};

// References may repeat an id; repeats are collapsed before use and must
// agree on score and features.
struct ReferenceSet {
  std::vector<Reference> references;
};

// 1-D maximum likelihood for one query against fixed reference scores:
// argmax_s sum_r p_r log Phi(d_r) + (1 - p_r) log Phi(-d_r),
// d_r = (s - s_r) / (sigma_obs sqrt 2). predictions[r] is the probability
// that the query is preferred over reference r. Solved by bisection on the
// monotone derivative; throws DataError when no sign change is found.
double ScoreAgainstReferences(std::span<const double> predictions,
                              std::span<const double> reference_scores,
                              double sigma_obs = kDefaultSigmaObs);

// Single-item inference on the reference scale. Throws DataError with
// fewer than 2 distinct references or when the query id is a reference id.
double ScoreSingle(const ComparatorModel& model, const Item& query,
                   const ReferenceSet& refs, const InferenceConfig& config);

}  // namespace pairscale

#endif  // PAIRSCALE_INFERENCE_H_
