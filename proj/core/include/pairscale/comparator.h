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

#ifndef PAIRSCALE_COMPARATOR_H_
#define PAIRSCALE_COMPARATOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairscale/comparison_matrix.h"

namespace pairscale {

enum class Activation { kRelu, kIdentity };

std::string_view ActivationName(Activation a);
Activation ParseActivation(std::string_view name);

struct DenseLayer {
  size_t in = 0;
  size_t out = 0;
  // out x in, row-major.
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Siamese pairwise comparator. A feed-forward backbone embeds each item;
// the hub layer H(V) = (F(V) - F(-V)) / 2 with F(V) = w.V + b acts on the
// embedding difference V = B(x_i) - B(x_j), and the output is sigmoid(H(V)).
// H is odd in V, so forward(i, j) + forward(j, i) = 1 and hub_bias never
// influences the output. The same holds for the bias of an identity
// embedding layer, which cancels in V; both receive zero gradient.
struct ComparatorModel {
  std::vector<DenseLayer> layers;
  std::vector<double> hub_weight;
  double hub_bias = 0.0;

  size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  size_t embedding_dim() const { return hub_weight.size(); }
  size_t NumParameters() const;
  // Throws DataError when layer dimensions do not chain from the input to
  // the hub layer.
  void CheckConsistent() const;

  friend bool operator==(const ComparatorModel&,
                         const ComparatorModel&) = default;
};

struct ModelArchitecture {
  size_t input_dim = 8;
  std::vector<size_t> hidden = {16};
  size_t embedding_dim = 8;
  Activation hidden_activation = Activation::kRelu;
  Activation embedding_activation = Activation::kIdentity;
};

// He-style initialization for ReLU layers, 1/sqrt(fan_in) otherwise.
ComparatorModel InitializeModel(const ModelArchitecture& arch, uint64_t seed);

// Zero-valued model with the same shape, used as a gradient container.
ComparatorModel ZerosLike(const ComparatorModel& model);

struct ParamBlock {
  std::span<double> values;
  bool hub = false;
};
// Every parameter of the model in a fixed order: per layer (weights,
// bias), then hub weight, then hub bias.
std::vector<ParamBlock> ParameterBlocks(ComparatorModel& model);

std::vector<double> Embed(const ComparatorModel& model,
                          std::span<const double> features);

// The linear part w.V and the bias of F are combined separately so the
// bias cancels exactly rather than up to rounding.
double HubOutput(const ComparatorModel& model, std::span<const double> v);

double Sigmoid(double x);

// Probability that item i is preferred over item j. Throws DataError on a
// feature dimension mismatch.
double Forward(const ComparatorModel& model, std::span<const double> feat_i,
               std::span<const double> feat_j);

// Predictions are clamped to [1e-12, 1 - 1e-12] before taking logs.
inline constexpr double kPredictionClamp = 1e-12;

// -(1/N) sum_r n_r [p_r log M_r + (1 - p_r) log(1 - M_r)], N = sum_r n_r.
double WeightedBceLoss(std::span<const double> predictions,
                       std::span<const PairRecord> records);

// Same loss from hub outputs h, M = sigmoid(h). log M and log(1 - M) are
// evaluated as -softplus(-h) and -softplus(h), which keeps full precision
// when M is near 0 or 1; h is clamped to the logits of the prediction
// clamp.
double WeightedBceLossFromLogits(std::span<const double> logits,
                                 std::span<const PairRecord> records);

// Records plus the features of every distinct item they reference. Record
// indices i, j point into slot_features; each item occupies one slot no
// matter how many records reference it.
struct TrainBatch {
  std::vector<PairRecord> records;
  std::vector<std::vector<double>> slot_features;
  // Source item index of every slot.
  std::vector<size_t> slot_items;
};

// records index into features.
TrainBatch BuildBatch(std::span<const PairRecord> records,
                      const std::vector<std::vector<double>>& features);

std::vector<double> PredictBatch(const ComparatorModel& model,
                                 const TrainBatch& batch);
// Hub outputs H(V) for every record; PredictBatch is their sigmoid.
std::vector<double> BatchLogits(const ComparatorModel& model,
                                const TrainBatch& batch);
double BatchLoss(const ComparatorModel& model, const TrainBatch& batch);

// Exact gradient of BatchLoss. With use_item_cache each distinct item is
// embedded and back-propagated once with its accumulated upstream
// gradient; without it every record endpoint is processed separately.
ComparatorModel Backward(const ComparatorModel& model, const TrainBatch& batch,
                         bool use_item_cache = true);

// Worst relative error between an analytic gradient and central finite
// differences over every parameter; the denominator is
// max(|analytic|, |numeric|, 1e-12).
double GradCheck(const ComparatorModel& model, const TrainBatch& batch,
                 double epsilon);
double GradCheckAgainst(const ComparatorModel& model, const TrainBatch& batch,
                        const ComparatorModel& analytic, double epsilon);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double lr_backbone = 3e-3;
  double lr_hub = 1e-2;
  AdamConfig adam;
  // Learning rates are multiplied by this after every epoch; in (0, 1].
  double lr_decay = 0.93;
  size_t epochs = 40;
  size_t batch_size = 16;
  // Records with fewer comparisons are dropped before training.
  double min_comparisons_threshold = 2.0;
  uint64_t seed = 0;
};

struct TrainResult {
  ComparatorModel model;
  // Loss over all training records after each epoch.
  std::vector<double> loss_history;
  size_t num_records = 0;
};

// Adam with separate backbone and hub learning rates, per-epoch decay,
// seeded shuffling, and a fresh random orientation of every record each
// epoch. Records are first brought to a canonical orientation (i < j), so
// pre-swapping any record does not change the run. Throws DataError when
// no record survives the threshold.
TrainResult Train(ComparatorModel model, std::span<const PairRecord> records,
                  const std::vector<std::vector<double>>& features,
                  const TrainConfig& config);

}  // namespace pairscale

#endif  // PAIRSCALE_COMPARATOR_H_
