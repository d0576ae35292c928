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

#include "pairscale/inference.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "pairscale/error.h"
#include "pairscale/gaussian.h"
#include "pairscale/random.h"

namespace pairscale {

std::string_view PairStrategyName(PairStrategy s) {
  switch (s) {
    case PairStrategy::kFull:
      return "full";
    case PairStrategy::kChainPlusRandom:
      return "chain_plus_random";
    case PairStrategy::kActive:
      return "active";
  }
  return "unknown";
}

PairStrategy ParsePairStrategy(std::string_view name) {
  if (name == "full") return PairStrategy::kFull;
  if (name == "chain_plus_random") return PairStrategy::kChainPlusRandom;
  if (name == "active") return PairStrategy::kActive;
  throw UsageError("unknown pair strategy '" + std::string(name) + "'");
}

std::string_view ScalerKindName(ScalerKind s) {
  return s == ScalerKind::kTrueSkill ? "trueskill" : "mle";
}

ScalerKind ParseScalerKind(std::string_view name) {
  if (name == "trueskill") return ScalerKind::kTrueSkill;
  if (name == "mle") return ScalerKind::kMle;
  throw UsageError("unknown scaler '" + std::string(name) +
                   "' (expected trueskill or mle)");
}

std::string_view SingleModeName(SingleMode m) {
  return m == SingleMode::kFixedReferences ? "fixed_references" : "rescale";
}

SingleMode ParseSingleMode(std::string_view name) {
  if (name == "fixed_references") return SingleMode::kFixedReferences;
  if (name == "rescale") return SingleMode::kRescale;
  throw UsageError("unknown single-item mode '" + std::string(name) + "'");
}

size_t DefaultBudget(size_t n) { return n == 0 ? 0 : (n - 1) + n / 2; }

ComparisonMatrix PredictMatrix(const ComparatorModel& model,
                               const ItemSet& items,
                               const std::vector<ItemPair>& pairs,
                               double c_comparisons) {
  if (!(c_comparisons > 0.0)) {
    throw std::invalid_argument("PredictMatrix: c_comparisons must be > 0");
  }
  ComparisonMatrix m(items.ids());
  for (const auto& [i, j] : pairs) {
    if (i >= items.size() || j >= items.size() || i == j) {
      throw std::invalid_argument("PredictMatrix: invalid pair");
    }
    for (size_t k : {i, j}) {
      if (items[k].features.empty()) {
        throw DataError("item '" + items[k].id + "' has no features");
      }
    }
    const double p = Forward(model, items[i].features, items[j].features);
    m.set_count(i, j, c_comparisons * p);
    m.set_count(j, i, c_comparisons * (1.0 - p));
  }
  return m;
}

JodScale ScaleMatrix(const ComparisonMatrix& matrix,
                     const InferenceConfig& config) {
  if (config.scaler == ScalerKind::kMle) return ScaleMle(matrix, config.mle);
  const TrueSkillState initial =
      TrueSkillState::Initial(matrix.size(), config.trueskill);
  return ScaleTrueSkill(matrix, initial, config.trueskill_passes,
                        SubstreamSeed(config.seed, "scale/trueskill"))
      .scale;
}

namespace {

ItemPair Ordered(size_t a, size_t b) { return a < b ? ItemPair{a, b} : ItemPair{b, a}; }

std::vector<ItemPair> ChainByMu(const TrueSkillState& state) {
  std::vector<size_t> order(state.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return state.mu[a] < state.mu[b]; });
  std::vector<ItemPair> chain;
  for (size_t k = 0; k + 1 < order.size(); ++k) {
    chain.push_back(Ordered(order[k], order[k + 1]));
  }
  return chain;
}

}  // namespace

std::vector<ItemPair> GreedyActivePairs(const TrueSkillState& state,
                                        const std::vector<ItemPair>& exclude,
                                        size_t count) {
  const size_t n = state.size();
  std::set<ItemPair> taken(exclude.begin(), exclude.end());
  TrueSkillState scratch = state;
  std::vector<ItemPair> picks;
  struct Candidate {
    double gap;
    ItemPair pair;
  };
  std::vector<Candidate> candidates;
  while (picks.size() < count) {
    candidates.clear();
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        if (taken.count({i, j}) != 0) continue;
        candidates.push_back({std::abs(scratch.mu[i] - scratch.mu[j]), {i, j}});
      }
    }
    if (candidates.empty()) break;
    const size_t pool = std::min(candidates.size(), std::max<size_t>(n, 1));
    std::partial_sort(candidates.begin(), candidates.begin() + pool,
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.gap != b.gap) return a.gap < b.gap;
                        return a.pair < b.pair;
                      });
    const Candidate* best = nullptr;
    double best_var = -1.0;
    for (size_t k = 0; k < pool; ++k) {
      const auto [i, j] = candidates[k].pair;
      const double var = scratch.sigma[i] * scratch.sigma[i] +
                         scratch.sigma[j] * scratch.sigma[j];
      if (var > best_var || (var == best_var && candidates[k].pair < best->pair)) {
        best_var = var;
        best = &candidates[k];
      }
    }
    const auto [i, j] = best->pair;
    picks.push_back(best->pair);
    taken.insert(best->pair);
    const double c = std::sqrt(2.0 * scratch.beta * scratch.beta + best_var);
    ApplyTrueSkillOutcome(scratch, i, j, NormalCdf((scratch.mu[i] - scratch.mu[j]) / c));
  }
  return picks;
}

std::vector<ItemPair> SelectPairs(PairStrategy strategy, size_t n,
                                  const TrueSkillState& state, size_t budget,
                                  uint64_t seed) {
  if (n < 2) throw std::invalid_argument("SelectPairs: need at least 2 items");
  const size_t all = n * (n - 1) / 2;
  if (strategy == PairStrategy::kFull) {
    return MakeDesign(DesignKind::kFull, n, 0, 1, seed).pairs;
  }
  if (budget < n - 1) {
    throw std::invalid_argument("SelectPairs: budget " + std::to_string(budget) +
                                " is below the connectivity reserve " +
                                std::to_string(n - 1));
  }
  budget = std::min(budget, all);
  if (strategy == PairStrategy::kChainPlusRandom) {
    return MakeDesign(DesignKind::kChainPlusRandom, n, budget - (n - 1), 1, seed)
        .pairs;
  }
  if (state.size() != n) {
    throw std::invalid_argument("SelectPairs: state size does not match n");
  }
  std::vector<ItemPair> pairs = ChainByMu(state);
  const std::vector<ItemPair> extra =
      GreedyActivePairs(state, pairs, budget - pairs.size());
  pairs.insert(pairs.end(), extra.begin(), extra.end());
  return pairs;
}

namespace {

void ObserveInto(const std::vector<ItemPair>& pairs, const PairObserver& observe,
                 ComparisonMatrix& total, ComparisonMatrix& delta) {
  for (const auto& [i, j] : pairs) {
    const auto [wins_i, wins_j] = observe(i, j);
    total.add_count(i, j, wins_i);
    total.add_count(j, i, wins_j);
    delta.add_count(i, j, wins_i);
    delta.add_count(j, i, wins_j);
  }
}

}  // namespace

ActiveSamplingResult RunActiveSampling(const std::vector<std::string>& ids,
                                       size_t budget,
                                       const PairObserver& observe,
                                       const TrueSkillParams& params,
                                       size_t round_size, uint64_t seed) {
  const size_t n = ids.size();
  ActiveSamplingResult result;
  result.state = TrueSkillState::Initial(n, params);
  result.matrix = ComparisonMatrix(ids);
  result.pairs = SelectPairs(PairStrategy::kActive, n, result.state, n - 1, seed);
  budget = std::min(budget, n * (n - 1) / 2);
  round_size = std::max<size_t>(round_size, 1);
  std::vector<ItemPair> batch = result.pairs;
  for (uint64_t round = 0;; ++round) {
    ComparisonMatrix delta(ids);
    ObserveInto(batch, observe, result.matrix, delta);
    if (delta.TotalComparisons() > 0.0) {
      result.state =
          ScaleTrueSkill(delta, result.state, 1,
                         SubstreamSeed(seed, "active/replay", round))
              .state;
    }
    if (result.pairs.size() >= budget) break;
    batch = GreedyActivePairs(result.state, result.pairs,
                              std::min(round_size, budget - result.pairs.size()));
    if (batch.empty()) break;
    result.pairs.insert(result.pairs.end(), batch.begin(), batch.end());
  }
  return result;
}

JodScale ScoreMulti(const ComparatorModel& model, const ItemSet& items,
                    const InferenceConfig& config,
                    ComparisonMatrix* predicted_matrix) {
  const size_t n = items.size();
  if (n < 2) throw DataError("multi-item inference needs at least 2 items");
  const size_t budget = config.budget == 0 ? DefaultBudget(n) : config.budget;
  ComparisonMatrix matrix;
  if (config.pair_strategy == PairStrategy::kActive) {
    const double c = config.c_comparisons;
    PairObserver observe = [&](size_t i, size_t j) {
      const double p = Forward(model, items[i].features, items[j].features);
      return std::pair<double, double>(c * p, c * (1.0 - p));
    };
    for (const Item& item : items.items()) {
      if (item.features.empty()) {
        throw DataError("item '" + item.id + "' has no features");
      }
    }
    matrix = RunActiveSampling(items.ids(), budget, observe, config.trueskill,
                               config.active_round_size,
                               SubstreamSeed(config.seed, "infer/active"))
                 .matrix;
  } else {
    const TrueSkillState state = TrueSkillState::Initial(n, config.trueskill);
    const auto pairs = SelectPairs(config.pair_strategy, n, state, budget,
                                   SubstreamSeed(config.seed, "infer/pairs"));
    matrix = PredictMatrix(model, items, pairs, config.c_comparisons);
  }
  JodScale scale = ScaleMatrix(matrix, config);
  if (predicted_matrix != nullptr) *predicted_matrix = std::move(matrix);
  return scale;
}

double ScoreAgainstReferences(std::span<const double> predictions,
                              std::span<const double> reference_scores,
                              double sigma_obs) {
  if (predictions.size() != reference_scores.size() || predictions.empty()) {
    throw std::invalid_argument("ScoreAgainstReferences: bad input sizes");
  }
  const double kappa = sigma_obs * std::numbers::sqrt2;
  auto derivative = [&](double s) {
    double d = 0.0;
    for (size_t r = 0; r < predictions.size(); ++r) {
      const double p =
          std::clamp(predictions[r], kPredictionClamp, 1.0 - kPredictionClamp);
      const double x = (s - reference_scores[r]) / kappa;
      d += p * InverseMillsRatio(x) - (1.0 - p) * InverseMillsRatio(-x);
    }
    return d;
  };
  const auto [min_it, max_it] =
      std::minmax_element(reference_scores.begin(), reference_scores.end());
  double lo = *min_it - 1.0;
  double hi = *max_it + 1.0;
  double width = 1.0;
  for (int k = 0; derivative(lo) < 0.0; ++k) {
    if (k == 60) throw DataError("single-item score: lower bracket not found");
    width *= 2.0;
    lo -= width;
  }
  width = 1.0;
  for (int k = 0; derivative(hi) > 0.0; ++k) {
    if (k == 60) throw DataError("single-item score: upper bracket not found");
    width *= 2.0;
    hi += width;
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (derivative(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ScoreSingle(const ComparatorModel& model, const Item& query,
                   const ReferenceSet& refs, const InferenceConfig& config) {
  std::vector<Reference> unique;
  std::unordered_map<std::string, size_t> seen;
  for (const Reference& r : refs.references) {
    if (r.item.id == query.id) {
      throw DataError("query id '" + query.id + "' is also a reference id");
    }
    auto [it, inserted] = seen.emplace(r.item.id, unique.size());
    if (inserted) {
      unique.push_back(r);
    } else if (unique[it->second].score != r.score ||
               unique[it->second].item.features != r.item.features) {
      throw DataError("reference '" + r.item.id +
                      "' appears twice with different data");
    }
  }
  if (unique.size() < 2) {
    throw DataError("single-item inference needs at least 2 distinct references");
  }

  if (config.single_mode == SingleMode::kFixedReferences) {
    std::vector<double> predictions, scores;
    for (const Reference& r : unique) {
      predictions.push_back(Forward(model, query.features, r.item.features));
      scores.push_back(r.score);
    }
    return ScoreAgainstReferences(predictions, scores, config.mle.sigma_obs);
  }

  // Re-scale everything together, then shift onto the reference scale.
  std::vector<Item> all_items;
  JodScale ref_scale;
  for (const Reference& r : unique) {
    all_items.push_back(r.item);
    ref_scale.item_ids.push_back(r.item.id);
    ref_scale.scores.push_back(r.score);
  }
  all_items.push_back(query);
  const ItemSet items(std::move(all_items));
  const size_t n = items.size();
  const auto pairs = MakeDesign(DesignKind::kFull, n, 0, 1, 0).pairs;
  const JodScale scaled =
      ScaleMatrix(PredictMatrix(model, items, pairs, config.c_comparisons), config);
  JodScale refs_only{std::vector<std::string>(scaled.item_ids.begin(),
                                              scaled.item_ids.end() - 1),
                     std::vector<double>(scaled.scores.begin(),
                                         scaled.scores.end() - 1),
                     {}};
  const double shift = AlignScores(refs_only, ref_scale).Mean() - refs_only.Mean();
  return scaled.scores.back() + shift;
}

}  // namespace pairscale
