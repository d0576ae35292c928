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

#ifndef PAIRSCALE_RANDOM_H_
#define PAIRSCALE_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace pairscale {

// Seeded generator with distribution code written out by hand, so that a
// given seed yields the same stream on every standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  // Uniform integer in [0, bound). bound must be positive.
  uint64_t UniformInt(uint64_t bound);
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

uint64_t SplitMix64(uint64_t x);

// Derives an independent seed for a labeled sub-stream ("train/shuffle",
// "simulation", ...) from one root seed.
uint64_t SubstreamSeed(uint64_t root, std::string_view label);
uint64_t SubstreamSeed(uint64_t root, std::string_view label, uint64_t index);

}  // namespace pairscale

#endif  // PAIRSCALE_RANDOM_H_
