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

#include "pairscale/observer.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pairscale/error.h"
#include "pairscale/gaussian.h"
#include "pairscale/random.h"

namespace pairscale {

double LinkProbability(double score_diff, double sigma_obs) {
  return NormalCdf(score_diff / (sigma_obs * std::numbers::sqrt2));
}

double LinkScoreDifference(double p, double sigma_obs) {
  return InverseNormalCdf(p) * sigma_obs * std::numbers::sqrt2;
}

std::string_view DesignKindName(DesignKind kind) {
  switch (kind) {
    case DesignKind::kFull:
      return "full";
    case DesignKind::kChainPlusRandom:
      return "chain_plus_random";
  }
  return "unknown";
}

DesignKind ParseDesignKind(std::string_view name) {
  if (name == "full") return DesignKind::kFull;
  if (name == "chain_plus_random") return DesignKind::kChainPlusRandom;
  throw UsageError("unknown design '" + std::string(name) +
                   "' (expected full or chain_plus_random)");
}

Design MakeDesign(DesignKind kind, size_t n, size_t extra_random_pairs,
                  size_t comparisons_per_pair, uint64_t seed) {
  if (n < 2) throw std::invalid_argument("MakeDesign: need at least 2 items");
  Design design;
  design.kind = kind;
  design.num_items = n;
  design.comparisons_per_pair = comparisons_per_pair;
  if (kind == DesignKind::kFull) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) design.pairs.emplace_back(i, j);
    }
    return design;
  }
  for (size_t i = 0; i + 1 < n; ++i) design.pairs.emplace_back(i, i + 1);
  std::vector<ItemPair> candidates;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 2; j < n; ++j) candidates.emplace_back(i, j);
  }
  if (extra_random_pairs > candidates.size()) {
    throw std::invalid_argument(
        "MakeDesign: " + std::to_string(extra_random_pairs) +
        " extra pairs requested but only " + std::to_string(candidates.size()) +
        " non-adjacent pairs exist");
  }
  Rng rng(seed);
  // Partial Fisher-Yates: the first extra_random_pairs slots end up random.
  for (size_t k = 0; k < extra_random_pairs; ++k) {
    const size_t pick = k + rng.UniformInt(candidates.size() - k);
    std::swap(candidates[k], candidates[pick]);
  }
  candidates.resize(extra_random_pairs);
  std::sort(candidates.begin(), candidates.end());
  design.pairs.insert(design.pairs.end(), candidates.begin(), candidates.end());
  return design;
}

bool IsConnected(size_t num_items, const std::vector<ItemPair>& pairs) {
  if (num_items <= 1) return true;
  ComparisonMatrix adjacency{std::vector<std::string>(num_items)};
  for (const auto& [a, b] : pairs) adjacency.set_count(a, b, 1.0);
  return ConnectedComponents(adjacency).size() == 1;
}

SimulatedMatrix SimulateMatrix(const std::vector<std::string>& ids,
                               const std::vector<double>& true_scores,
                               const Design& design,
                               const ObserverConfig& config) {
  if (ids.size() != design.num_items || true_scores.size() != design.num_items) {
    throw std::invalid_argument("SimulateMatrix: item count mismatch");
  }
  SimulatedMatrix out{ComparisonMatrix(ids), true};
  Rng rng(config.rng_seed);
  for (const auto& [i, j] : design.pairs) {
    if (i >= design.num_items || j >= design.num_items || i == j) {
      throw std::invalid_argument("SimulateMatrix: invalid design pair");
    }
    const double p =
        LinkProbability(true_scores[i] - true_scores[j], config.sigma_obs);
    size_t wins_i = 0;
    for (size_t k = 0; k < design.comparisons_per_pair; ++k) {
      if (rng.Bernoulli(p)) ++wins_i;
    }
    out.matrix.add_count(i, j, static_cast<double>(wins_i));
    out.matrix.add_count(
        j, i, static_cast<double>(design.comparisons_per_pair - wins_i));
  }
  out.connected = ConnectedComponents(out.matrix).size() <= 1;
  return out;
}

ComparisonMatrix ExpectedMatrix(const std::vector<std::string>& ids,
                                const std::vector<double>& true_scores,
                                const std::vector<ItemPair>& pairs,
                                double comparisons, double sigma_obs) {
  ComparisonMatrix m(ids);
  for (const auto& [i, j] : pairs) {
    const double p = LinkProbability(true_scores[i] - true_scores[j], sigma_obs);
    m.set_count(i, j, comparisons * p);
    m.set_count(j, i, comparisons * (1.0 - p));
  }
  return m;
}

}  // namespace pairscale
