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

#ifndef PAIRSCALE_COMPARISON_MATRIX_H_
#define PAIRSCALE_COMPARISON_MATRIX_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pairscale {

struct Item {
  std::string id;
  // Empty when the item carries no features.
  std::vector<double> features;
};

// Ordered collection of items with unique, non-empty ids. All items that
// carry features share one dimension.
class ItemSet {
 public:
  ItemSet() = default;
  // Throws DataError on duplicate/empty ids or mixed feature dimensions.
  explicit ItemSet(std::vector<Item> items);

  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Item& operator[](size_t i) const { return items_[i]; }
  const std::vector<Item>& items() const { return items_; }
  // Feature dimension, 0 if no item has features.
  size_t feature_dim() const { return feature_dim_; }
  std::optional<size_t> IndexOf(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  std::vector<Item> items_;
  std::unordered_map<std::string, size_t> index_;
  size_t feature_dim_ = 0;
};

// Zero-diagonal matrix of (possibly fractional) win counts: count(i, j) is
// the number of times item i was preferred over item j. Stored densely; the
// item counts handled here are small.
//
// Construction does not enforce the invariants so that Validate() can
// report them; every other operation assumes a valid matrix.
class ComparisonMatrix {
 public:
  ComparisonMatrix() = default;
  explicit ComparisonMatrix(std::vector<std::string> item_ids);
  ComparisonMatrix(std::vector<std::string> item_ids,
                   std::vector<double> row_major_counts);

  size_t size() const { return ids_.size(); }
  const std::vector<std::string>& item_ids() const { return ids_; }
  const std::vector<double>& raw_counts() const { return counts_; }
  std::optional<size_t> IndexOf(const std::string& id) const;

  double count(size_t i, size_t j) const { return counts_.at(i * size() + j); }
  void set_count(size_t i, size_t j, double value) {
    counts_.at(i * size() + j) = value;
  }
  void add_count(size_t i, size_t j, double value) {
    counts_.at(i * size() + j) += value;
  }
  // n_ij = c_ij + c_ji.
  double total(size_t i, size_t j) const { return count(i, j) + count(j, i); }
  double TotalComparisons() const;
  // Number of unordered pairs with n_ij > 0.
  size_t ObservedPairCount() const;

  friend bool operator==(const ComparisonMatrix&, const ComparisonMatrix&) =
      default;

 private:
  std::vector<std::string> ids_;
  std::vector<double> counts_;
};

// One observed unordered pair in a fixed orientation.
struct PairRecord {
  size_t i = 0;
  size_t j = 0;
  double wins_i = 0.0;
  double wins_j = 0.0;
  // wins_i / n.
  double p = 0.0;
  // wins_i + wins_j, always > 0.
  double n = 0.0;

  static PairRecord FromWins(size_t i, size_t j, double wins_i, double wins_j);
  // Same observation seen from item j.
  PairRecord Swapped() const;
};

// Returns every invariant violation; an empty list means the matrix is
// valid.
std::vector<std::string> Validate(const ComparisonMatrix& matrix);

// c_ij / n_ij, or nullopt when the pair was never compared. Throws
// std::out_of_range for bad indices and std::invalid_argument for i == j.
std::optional<double> EmpiricalProbability(const ComparisonMatrix& matrix,
                                           size_t i, size_t j);

// Zeroes both directions of every pair with n_ij < min_n.
ComparisonMatrix ThresholdFilter(const ComparisonMatrix& matrix, double min_n);

// One record per observed unordered pair, in increasing (i, j) order, with
// each record's orientation flipped by a fair coin drawn from order_seed.
std::vector<PairRecord> ToPairRecords(const ComparisonMatrix& matrix,
                                      uint64_t order_seed);

// Histogram of p_ij (canonical i < j orientation) over observed pairs.
// Bins are [k/B, (k+1)/B) except the last, which is closed.
std::vector<size_t> ProbabilityHistogram(const ComparisonMatrix& matrix,
                                         size_t bins);

// Index of the bin holding value under the histogram convention above.
size_t HistogramBin(double value, size_t bins);

// Connected components of the comparison graph (edges where n_ij > 0).
// Components are ordered by their smallest member; members are sorted.
std::vector<std::vector<size_t>> ConnectedComponents(
    const ComparisonMatrix& matrix);

}  // namespace pairscale

#endif  // PAIRSCALE_COMPARISON_MATRIX_H_
