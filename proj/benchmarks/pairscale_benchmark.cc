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

#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "pairscale/comparator.h"
#include "pairscale/inference.h"
#include "pairscale/metrics.h"
#include "pairscale/observer.h"
#include "pairscale/random.h"
#include "pairscale/scaling.h"

namespace pairscale {
namespace {

std::vector<std::string> Ids(size_t n) {
  std::vector<std::string> ids;
  for (size_t k = 0; k < n; ++k) ids.push_back("i" + std::to_string(k));
  return ids;
}

std::vector<double> Scores(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> s(n);
  for (double& v : s) v = rng.Normal();
  return s;
}

ComparisonMatrix Simulated(size_t n, size_t k) {
  ObserverConfig obs;
  obs.rng_seed = 7;
  return SimulateMatrix(Ids(n), Scores(n, 3), MakeDesign(DesignKind::kFull, n, 0, k, 0), obs)
      .matrix;
}

std::vector<std::vector<double>> Features(size_t items, size_t dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> f(items, std::vector<double>(dim));
  for (auto& row : f) {
    for (double& v : row) v = rng.Normal();
  }
  return f;
}

TrainBatch Batch(size_t records, size_t items, size_t dim) {
  const auto features = Features(items, dim, 1);
  Rng rng(2);
  std::vector<PairRecord> recs;
  for (size_t r = 0; r < records; ++r) {
    const size_t i = rng.UniformInt(items);
    const size_t j = (i + 1 + rng.UniformInt(items - 1)) % items;
    recs.push_back(PairRecord::FromWins(i, j, 1 + rng.UniformInt(5), 1 + rng.UniformInt(5)));
  }
  return BuildBatch(recs, features);
}

void BM_Forward(benchmark::State& state) {
  ModelArchitecture arch;
  arch.input_dim = static_cast<size_t>(state.range(0));
  const ComparatorModel model = InitializeModel(arch, 1);
  const auto f = Features(2, arch.input_dim, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Forward(model, f[0], f[1]));
}
BENCHMARK(BM_Forward)->Arg(8)->Arg(64);

void BM_Backward(benchmark::State& state) {
  ModelArchitecture arch;
  const ComparatorModel model = InitializeModel(arch, 1);
  const TrainBatch batch = Batch(static_cast<size_t>(state.range(0)), 24, arch.input_dim);
  const bool cache = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(Backward(model, batch, cache));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Backward)->Args({16, 1})->Args({16, 0})->Args({256, 1})->Args({256, 0});

void BM_ScaleMle(benchmark::State& state) {
  const ComparisonMatrix m = Simulated(static_cast<size_t>(state.range(0)), 30);
  for (auto _ : state) benchmark::DoNotOptimize(ScaleMle(m, {}));
}
BENCHMARK(BM_ScaleMle)->Arg(15)->Arg(50)->Unit(benchmark::kMicrosecond);

void BM_ScaleTrueSkill(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const ComparisonMatrix m = Simulated(n, 30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ScaleTrueSkill(m, TrueSkillState::Initial(n), 1, 5));
  }
}
BENCHMARK(BM_ScaleTrueSkill)->Arg(15)->Arg(50)->Unit(benchmark::kMicrosecond);

void BM_ActiveSampling(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const auto scores = Scores(n, 9);
  const PairObserver observe = [&](size_t i, size_t j) {
    const double p = LinkProbability(scores[i] - scores[j]);
    return std::pair<double, double>(30 * p, 30 * (1 - p));
  };
  const auto ids = Ids(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunActiveSampling(ids, DefaultBudget(n), observe, {}, 1, 1));
  }
}
BENCHMARK(BM_ActiveSampling)->Arg(20)->Arg(60)->Unit(benchmark::kMicrosecond);

void BM_Krcc(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const auto x = Scores(n, 1), y = Scores(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Krcc(x, y));
}
BENCHMARK(BM_Krcc)->Arg(100)->Arg(10000);

}  // namespace
}  // namespace pairscale

BENCHMARK_MAIN();
