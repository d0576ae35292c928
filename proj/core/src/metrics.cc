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

#include "pairscale/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pairscale/comparison_matrix.h"

namespace pairscale {
namespace {

void CheckPair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("correlation inputs differ in length");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("correlation needs at least 2 values");
  }
}

// Counts inversions while merge-sorting v.
uint64_t MergeCountInversions(std::vector<double>& v, std::vector<double>& tmp,
                              size_t lo, size_t hi) {
  if (hi - lo < 2) return 0;
  const size_t mid = lo + (hi - lo) / 2;
  uint64_t swaps = MergeCountInversions(v, tmp, lo, mid) +
                   MergeCountInversions(v, tmp, mid, hi);
  size_t a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      swaps += mid - a;
      tmp[out++] = v[b++];
    } else {
      tmp[out++] = v[a++];
    }
  }
  while (a < mid) tmp[out++] = v[a++];
  while (b < hi) tmp[out++] = v[b++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return swaps;
}

// sum over runs of equal adjacent values of t(t-1)/2.
template <typename Eq>
uint64_t TiedPairs(size_t n, Eq equal) {
  uint64_t ties = 0;
  size_t run = 1;
  for (size_t k = 1; k <= n; ++k) {
    if (k < n && equal(k - 1, k)) {
      ++run;
    } else {
      ties += static_cast<uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

}  // namespace

std::optional<double> Plcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> x) {
  std::vector<size_t> order(x.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  size_t start = 0;
  while (start < order.size()) {
    size_t stop = start + 1;
    while (stop < order.size() && x[order[stop]] == x[order[start]]) ++stop;
    const double rank = 0.5 * static_cast<double>(start + 1 + stop);
    for (size_t k = start; k < stop; ++k) ranks[order[k]] = rank;
    start = stop;
  }
  return ranks;
}

std::optional<double> Srcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const std::vector<double> rx = AverageRanks(x);
  const std::vector<double> ry = AverageRanks(y);
  return Plcc(rx, ry);
}

std::optional<double> Krcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  const uint64_t pairs = static_cast<uint64_t>(n) * (n - 1) / 2;
  const uint64_t ties_x =
      TiedPairs(n, [&](size_t a, size_t b) { return x[order[a]] == x[order[b]]; });
  const uint64_t ties_xy = TiedPairs(n, [&](size_t a, size_t b) {
    return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]];
  });
  std::vector<double> ys(n), tmp(n);
  for (size_t k = 0; k < n; ++k) ys[k] = y[order[k]];
  const uint64_t swaps = MergeCountInversions(ys, tmp, 0, n);
  // ys is now sorted, so equal y values are adjacent.
  const uint64_t ties_y = TiedPairs(n, [&](size_t a, size_t b) { return ys[a] == ys[b]; });
  const double denom_x = static_cast<double>(pairs - ties_x);
  const double denom_y = static_cast<double>(pairs - ties_y);
  if (denom_x == 0.0 || denom_y == 0.0) return std::nullopt;
  const double s = static_cast<double>(pairs) - static_cast<double>(ties_x) -
                   static_cast<double>(ties_y) + static_cast<double>(ties_xy) -
                   2.0 * static_cast<double>(swaps);
  return std::clamp(s / std::sqrt(denom_x * denom_y), -1.0, 1.0);
}

double MaeAligned(const JodScale& predicted, const JodScale& reference) {
  const JodScale aligned = AlignScores(predicted, reference);
  const std::vector<double> ref = MatchScores(aligned, reference);
  if (ref.empty()) return 0.0;
  double acc = 0.0;
  for (size_t k = 0; k < ref.size(); ++k) acc += std::abs(aligned.scores[k] - ref[k]);
  return acc / static_cast<double>(ref.size());
}

Aggregate AggregateValues(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("AggregateValues: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t s = sorted.size();
  Aggregate agg;
  agg.count = s;
  agg.median = sorted[(s - 1) / 2];
  agg.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
             static_cast<double>(s);
  if (s == 1) {
    agg.moe = 0.0;
    agg.degenerate = true;
    return agg;
  }
  double ss = 0.0;
  for (double v : sorted) ss += (v - agg.mean) * (v - agg.mean);
  const double sd = std::sqrt(ss / static_cast<double>(s - 1));
  agg.moe = 1.96 * sd / std::sqrt(static_cast<double>(s));
  return agg;
}

SceneMetrics EvaluateScene(const JodScale& predicted, const JodScale& truth) {
  const std::vector<double> ref = MatchScores(predicted, truth);
  SceneMetrics m;
  if (ref.size() >= 2) {
    m.srcc = Srcc(predicted.scores, ref);
    m.plcc = Plcc(predicted.scores, ref);
    m.krcc = Krcc(predicted.scores, ref);
  }
  m.mae = MaeAligned(predicted, truth);
  return m;
}

MetricsReport BuildReport(std::map<std::string, SceneMetrics> per_scene) {
  MetricsReport report;
  report.per_scene = std::move(per_scene);
  std::map<std::string, std::vector<double>> columns;
  for (const char* name : {"srcc", "plcc", "krcc", "mae"}) columns[name];
  for (const auto& [scene, m] : report.per_scene) {
    if (m.srcc) columns["srcc"].push_back(*m.srcc);
    if (m.plcc) columns["plcc"].push_back(*m.plcc);
    if (m.krcc) columns["krcc"].push_back(*m.krcc);
    columns["mae"].push_back(m.mae);
  }
  for (const auto& [name, values] : columns) {
    report.aggregates[name] =
        values.empty() ? std::nullopt : std::optional(AggregateValues(values));
  }
  return report;
}

CalibrationHistogram Calibration(std::span<const double> predictions,
                                 std::span<const double> ground_truth,
                                 size_t bins, size_t prediction_bins) {
  if (predictions.size() != ground_truth.size()) {
    throw std::invalid_argument("Calibration: size mismatch");
  }
  if (bins == 0 || prediction_bins == 0) {
    throw std::invalid_argument("Calibration: bin counts must be positive");
  }
  CalibrationHistogram hist;
  hist.bins.resize(bins);
  std::vector<double> sums(bins, 0.0);
  for (size_t b = 0; b < bins; ++b) {
    hist.bins[b].edge_lo = static_cast<double>(b) / static_cast<double>(bins);
    hist.bins[b].edge_hi = static_cast<double>(b + 1) / static_cast<double>(bins);
    hist.bins[b].prediction_histogram.assign(prediction_bins, 0);
  }
  for (size_t k = 0; k < predictions.size(); ++k) {
    CalibrationBin& bin = hist.bins[HistogramBin(ground_truth[k], bins)];
    ++bin.count;
    ++bin.prediction_histogram[HistogramBin(predictions[k], prediction_bins)];
    sums[HistogramBin(ground_truth[k], bins)] += predictions[k];
  }
  for (size_t b = 0; b < bins; ++b) {
    if (hist.bins[b].count > 0) {
      hist.bins[b].mean_prediction =
          sums[b] / static_cast<double>(hist.bins[b].count);
    }
  }
  return hist;
}

}  // namespace pairscale
