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

#include "pairscale/comparison_matrix.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "pairscale/error.h"
#include "pairscale/random.h"

namespace pairscale {

ItemSet::ItemSet(std::vector<Item> items) : items_(std::move(items)) {
  for (size_t k = 0; k < items_.size(); ++k) {
    const Item& item = items_[k];
    if (item.id.empty()) {
      throw DataError("item " + std::to_string(k) + " has an empty id");
    }
    if (!index_.emplace(item.id, k).second) {
      throw DataError("duplicate item id '" + item.id + "'");
    }
    if (item.features.empty()) continue;
    if (feature_dim_ == 0) {
      feature_dim_ = item.features.size();
    } else if (item.features.size() != feature_dim_) {
      throw DataError("item '" + item.id + "' has " +
                      std::to_string(item.features.size()) +
                      " features, expected " + std::to_string(feature_dim_));
    }
  }
}

std::optional<size_t> ItemSet::IndexOf(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ItemSet::ids() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const Item& item : items_) out.push_back(item.id);
  return out;
}

ComparisonMatrix::ComparisonMatrix(std::vector<std::string> item_ids)
    : ids_(std::move(item_ids)), counts_(ids_.size() * ids_.size(), 0.0) {}

ComparisonMatrix::ComparisonMatrix(std::vector<std::string> item_ids,
                                   std::vector<double> row_major_counts)
    : ids_(std::move(item_ids)), counts_(std::move(row_major_counts)) {}

std::optional<size_t> ComparisonMatrix::IndexOf(const std::string& id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<size_t>(it - ids_.begin());
}

double ComparisonMatrix::TotalComparisons() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

size_t ComparisonMatrix::ObservedPairCount() const {
  size_t pairs = 0;
  for (size_t i = 0; i < size(); ++i) {
    for (size_t j = i + 1; j < size(); ++j) {
      if (total(i, j) > 0.0) ++pairs;
    }
  }
  return pairs;
}

PairRecord PairRecord::FromWins(size_t i, size_t j, double wins_i,
                                double wins_j) {
  PairRecord r;
  r.i = i;
  r.j = j;
  r.wins_i = wins_i;
  r.wins_j = wins_j;
  r.n = wins_i + wins_j;
  r.p = wins_i / r.n;
  return r;
}

PairRecord PairRecord::Swapped() const {
  return FromWins(j, i, wins_j, wins_i);
}

std::vector<std::string> Validate(const ComparisonMatrix& matrix) {
  std::vector<std::string> violations;
  const size_t n = matrix.size();
  if (matrix.raw_counts().size() != n * n) {
    violations.push_back("dimension mismatch: " + std::to_string(n) +
                         " item ids but " +
                         std::to_string(matrix.raw_counts().size()) +
                         " count entries");
    return violations;
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const double c = matrix.count(i, j);
      const std::string at =
          "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      if (!std::isfinite(c)) {
        violations.push_back("non-finite count at " + at);
      } else if (i == j && c != 0.0) {
        violations.push_back("nonzero diagonal at " + at);
      } else if (c < 0.0) {
        violations.push_back("negative count at " + at);
      }
    }
  }
  return violations;
}

std::optional<double> EmpiricalProbability(const ComparisonMatrix& matrix,
                                           size_t i, size_t j) {
  if (i >= matrix.size() || j >= matrix.size()) {
    throw std::out_of_range("EmpiricalProbability: index out of range");
  }
  if (i == j) {
    throw std::invalid_argument("EmpiricalProbability: i == j");
  }
  const double n = matrix.total(i, j);
  if (n <= 0.0) return std::nullopt;
  return matrix.count(i, j) / n;
}

ComparisonMatrix ThresholdFilter(const ComparisonMatrix& matrix,
                                 double min_n) {
  ComparisonMatrix out = matrix;
  for (size_t i = 0; i < matrix.size(); ++i) {
    for (size_t j = i + 1; j < matrix.size(); ++j) {
      if (matrix.total(i, j) < min_n) {
        out.set_count(i, j, 0.0);
        out.set_count(j, i, 0.0);
      }
    }
  }
  return out;
}

std::vector<PairRecord> ToPairRecords(const ComparisonMatrix& matrix,
                                      uint64_t order_seed) {
  Rng rng(order_seed);
  std::vector<PairRecord> records;
  for (size_t i = 0; i < matrix.size(); ++i) {
    for (size_t j = i + 1; j < matrix.size(); ++j) {
      if (matrix.total(i, j) <= 0.0) continue;
      PairRecord r =
          PairRecord::FromWins(i, j, matrix.count(i, j), matrix.count(j, i));
      records.push_back(rng.Bernoulli(0.5) ? r.Swapped() : r);
    }
  }
  return records;
}

size_t HistogramBin(double value, size_t bins) {
  if (value <= 0.0) return 0;
  const auto k = static_cast<size_t>(std::floor(value * static_cast<double>(bins)));
  return std::min(k, bins - 1);
}

std::vector<size_t> ProbabilityHistogram(const ComparisonMatrix& matrix,
                                         size_t bins) {
  if (bins == 0) throw std::invalid_argument("ProbabilityHistogram: bins == 0");
  std::vector<size_t> hist(bins, 0);
  for (size_t i = 0; i < matrix.size(); ++i) {
    for (size_t j = i + 1; j < matrix.size(); ++j) {
      const double n = matrix.total(i, j);
      if (n <= 0.0) continue;
      ++hist[HistogramBin(matrix.count(i, j) / n, bins)];
    }
  }
  return hist;
}

std::vector<std::vector<size_t>> ConnectedComponents(
    const ComparisonMatrix& matrix) {
  const size_t n = matrix.size();
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (matrix.total(i, j) <= 0.0) continue;
      size_t a = find(i), b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<std::vector<size_t>> components;
  std::vector<size_t> slot(n, SIZE_MAX);
  for (size_t i = 0; i < n; ++i) {
    const size_t root = find(i);
    if (slot[root] == SIZE_MAX) {
      slot[root] = components.size();
      components.emplace_back();
    }
    components[slot[root]].push_back(i);
  }
  return components;
}

}  // namespace pairscale
