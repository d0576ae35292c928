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

#include "pairscale/comparator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "pairscale/error.h"
#include "pairscale/random.h"

namespace pairscale {

std::string_view ActivationName(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation ParseActivation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw UsageError("unknown activation '" + std::string(name) + "'");
}

size_t ComparatorModel::NumParameters() const {
  size_t count = hub_weight.size() + 1;
  for (const DenseLayer& l : layers) count += l.weights.size() + l.bias.size();
  return count;
}

void ComparatorModel::CheckConsistent() const {
  if (layers.empty()) throw DataError("comparator has no backbone layers");
  for (size_t k = 0; k < layers.size(); ++k) {
    const DenseLayer& l = layers[k];
    const std::string where = "layer " + std::to_string(k);
    if (l.in == 0 || l.out == 0) throw DataError(where + " has a zero dimension");
    if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) {
      throw DataError(where + " parameter sizes do not match its dimensions");
    }
    if (k > 0 && layers[k - 1].out != l.in) {
      throw DataError(where + " input does not match previous layer output");
    }
  }
  if (hub_weight.size() != layers.back().out) {
    throw DataError("hub weight does not match the embedding dimension");
  }
}

ComparatorModel InitializeModel(const ModelArchitecture& arch, uint64_t seed) {
  if (arch.input_dim == 0 || arch.embedding_dim == 0) {
    throw UsageError("model dimensions must be positive");
  }
  Rng rng(seed);
  ComparatorModel model;
  std::vector<size_t> dims = {arch.input_dim};
  dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
  dims.push_back(arch.embedding_dim);
  for (size_t k = 0; k + 1 < dims.size(); ++k) {
    DenseLayer layer;
    layer.in = dims[k];
    layer.out = dims[k + 1];
    layer.activation = (k + 2 == dims.size()) ? arch.embedding_activation
                                              : arch.hidden_activation;
    const double scale =
        std::sqrt((layer.activation == Activation::kRelu ? 2.0 : 1.0) /
                  static_cast<double>(layer.in));
    layer.weights.resize(layer.in * layer.out);
    for (double& w : layer.weights) w = scale * rng.Normal();
    layer.bias.assign(layer.out, 0.0);
    model.layers.push_back(std::move(layer));
  }
  model.hub_weight.resize(arch.embedding_dim);
  const double hub_scale = 1.0 / std::sqrt(static_cast<double>(arch.embedding_dim));
  for (double& w : model.hub_weight) w = hub_scale * rng.Normal();
  model.hub_bias = 0.0;
  return model;
}

ComparatorModel ZerosLike(const ComparatorModel& model) {
  ComparatorModel z = model;
  for (DenseLayer& l : z.layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  std::fill(z.hub_weight.begin(), z.hub_weight.end(), 0.0);
  z.hub_bias = 0.0;
  return z;
}

std::vector<ParamBlock> ParameterBlocks(ComparatorModel& model) {
  std::vector<ParamBlock> blocks;
  for (DenseLayer& l : model.layers) {
    blocks.push_back({std::span<double>(l.weights), false});
    blocks.push_back({std::span<double>(l.bias), false});
  }
  blocks.push_back({std::span<double>(model.hub_weight), true});
  blocks.push_back({std::span<double>(&model.hub_bias, 1), true});
  return blocks;
}

namespace {

// With an identity embedding layer its bias appears in both branches and
// cancels in V; it is then kept out of the embeddings and applied as
// (b - b), so like the hub bias it has no effect on any output bit.
bool EmbeddingBiasCancels(const ComparatorModel& model) {
  return !model.layers.empty() &&
         model.layers.back().activation == Activation::kIdentity;
}

// Layer inputs and pre-activations of one backbone pass. output omits the
// embedding bias when EmbeddingBiasCancels.
struct Trace {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
  std::vector<double> output;
};

Trace RunBackbone(const ComparatorModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw DataError("feature dimension " + std::to_string(x.size()) +
                    " does not match model input dimension " +
                    std::to_string(model.input_dim()));
  }
  Trace trace;
  std::vector<double> a(x.begin(), x.end());
  const bool drop_last_bias = EmbeddingBiasCancels(model);
  for (size_t k = 0; k < model.layers.size(); ++k) {
    const DenseLayer& l = model.layers[k];
    std::vector<double> z(l.bias);
    if (drop_last_bias && k + 1 == model.layers.size()) {
      std::fill(z.begin(), z.end(), 0.0);
    }
    for (size_t r = 0; r < l.out; ++r) {
      const double* row = &l.weights[r * l.in];
      double acc = 0.0;
      for (size_t c = 0; c < l.in; ++c) acc += row[c] * a[c];
      z[r] += acc;
    }
    std::vector<double> next = z;
    if (l.activation == Activation::kRelu) {
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    }
    trace.inputs.push_back(std::move(a));
    trace.pre.push_back(std::move(z));
    a = std::move(next);
  }
  trace.output = std::move(a);
  return trace;
}

// Accumulates parameter gradients for one backbone pass given the
// gradient of the loss with respect to its output.
void BackpropBackbone(const ComparatorModel& model, const Trace& trace,
                      std::vector<double> upstream, ComparatorModel& grad) {
  const bool inert_last_bias = EmbeddingBiasCancels(model);
  for (size_t k = model.layers.size(); k-- > 0;) {
    const bool bias_inert = inert_last_bias && k + 1 == model.layers.size();
    const DenseLayer& l = model.layers[k];
    DenseLayer& gl = grad.layers[k];
    const std::vector<double>& pre = trace.pre[k];
    const std::vector<double>& in = trace.inputs[k];
    if (l.activation == Activation::kRelu) {
      for (size_t r = 0; r < l.out; ++r) {
        if (!(pre[r] > 0.0)) upstream[r] = 0.0;
      }
    }
    std::vector<double> down(l.in, 0.0);
    for (size_t r = 0; r < l.out; ++r) {
      const double dz = upstream[r];
      if (dz == 0.0) continue;
      if (!bias_inert) gl.bias[r] += dz;
      const double* row = &l.weights[r * l.in];
      double* grow = &gl.weights[r * l.in];
      for (size_t c = 0; c < l.in; ++c) {
        grow[c] += dz * in[c];
        down[c] += dz * row[c];
      }
    }
    upstream = std::move(down);
  }
}

// V = B(x_i) - B(x_j) from two backbone outputs.
std::vector<double> Difference(const ComparatorModel& model,
                               const std::vector<double>& a,
                               const std::vector<double>& b) {
  std::vector<double> v(a.size());
  if (EmbeddingBiasCancels(model)) {
    const std::vector<double>& bias = model.layers.back().bias;
    for (size_t k = 0; k < a.size(); ++k) v[k] = (a[k] - b[k]) + (bias[k] - bias[k]);
  } else {
    for (size_t k = 0; k < a.size(); ++k) v[k] = a[k] - b[k];
  }
  return v;
}

}  // namespace

std::vector<double> Embed(const ComparatorModel& model,
                          std::span<const double> features) {
  std::vector<double> out = RunBackbone(model, features).output;
  if (EmbeddingBiasCancels(model)) {
    const std::vector<double>& bias = model.layers.back().bias;
    for (size_t k = 0; k < out.size(); ++k) out[k] += bias[k];
  }
  return out;
}

double HubOutput(const ComparatorModel& model, std::span<const double> v) {
  double lin_pos = 0.0;
  double lin_neg = 0.0;
  for (size_t k = 0; k < v.size(); ++k) {
    lin_pos += model.hub_weight[k] * v[k];
    lin_neg += model.hub_weight[k] * -v[k];
  }
  return 0.5 * ((lin_pos - lin_neg) + (model.hub_bias - model.hub_bias));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Forward(const ComparatorModel& model, std::span<const double> feat_i,
               std::span<const double> feat_j) {
  const std::vector<double> v = Difference(model, RunBackbone(model, feat_i).output,
                                           RunBackbone(model, feat_j).output);
  return Sigmoid(HubOutput(model, v));
}

double WeightedBceLoss(std::span<const double> predictions,
                       std::span<const PairRecord> records) {
  if (predictions.size() != records.size()) {
    throw std::invalid_argument("WeightedBceLoss: size mismatch");
  }
  double total_n = 0.0;
  double acc = 0.0;
  for (size_t k = 0; k < records.size(); ++k) {
    const PairRecord& r = records[k];
    if (!(r.n > 0.0)) throw std::invalid_argument("WeightedBceLoss: n_ij <= 0");
    const double m =
        std::clamp(predictions[k], kPredictionClamp, 1.0 - kPredictionClamp);
    acc += r.n * (r.p * std::log(m) + (1.0 - r.p) * std::log1p(-m));
    total_n += r.n;
  }
  return -acc / total_n;
}

namespace {

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

double WeightedBceLossFromLogits(std::span<const double> logits,
                                 std::span<const PairRecord> records) {
  if (logits.size() != records.size()) {
    throw std::invalid_argument("WeightedBceLossFromLogits: size mismatch");
  }
  static const double kLogitClamp =
      std::log1p(-kPredictionClamp) - std::log(kPredictionClamp);
  double total_n = 0.0;
  double acc = 0.0;
  for (size_t k = 0; k < records.size(); ++k) {
    const PairRecord& r = records[k];
    if (!(r.n > 0.0)) throw std::invalid_argument("WeightedBceLoss: n_ij <= 0");
    const double h = std::clamp(logits[k], -kLogitClamp, kLogitClamp);
    acc += r.n * (r.p * Softplus(-h) + (1.0 - r.p) * Softplus(h));
    total_n += r.n;
  }
  return acc / total_n;
}

TrainBatch BuildBatch(std::span<const PairRecord> records,
                      const std::vector<std::vector<double>>& features) {
  TrainBatch batch;
  std::unordered_map<size_t, size_t> slot_of;
  auto slot = [&](size_t item) {
    if (item >= features.size()) {
      throw DataError("record references unknown item " + std::to_string(item));
    }
    auto [it, inserted] = slot_of.emplace(item, batch.slot_items.size());
    if (inserted) {
      batch.slot_items.push_back(item);
      batch.slot_features.push_back(features[item]);
    }
    return it->second;
  };
  batch.records.reserve(records.size());
  for (const PairRecord& r : records) {
    PairRecord local = r;
    local.i = slot(r.i);
    local.j = slot(r.j);
    batch.records.push_back(local);
  }
  return batch;
}

std::vector<double> BatchLogits(const ComparatorModel& model,
                                const TrainBatch& batch) {
  std::vector<std::vector<double>> embeddings;
  embeddings.reserve(batch.slot_features.size());
  for (const auto& f : batch.slot_features) {
    embeddings.push_back(RunBackbone(model, f).output);
  }
  std::vector<double> logits;
  logits.reserve(batch.records.size());
  for (const PairRecord& r : batch.records) {
    logits.push_back(
        HubOutput(model, Difference(model, embeddings[r.i], embeddings[r.j])));
  }
  return logits;
}

std::vector<double> PredictBatch(const ComparatorModel& model,
                                 const TrainBatch& batch) {
  std::vector<double> predictions = BatchLogits(model, batch);
  for (double& h : predictions) h = Sigmoid(h);
  return predictions;
}

double BatchLoss(const ComparatorModel& model, const TrainBatch& batch) {
  return WeightedBceLossFromLogits(BatchLogits(model, batch), batch.records);
}

ComparatorModel Backward(const ComparatorModel& model, const TrainBatch& batch,
                         bool use_item_cache) {
  if (batch.records.empty()) throw std::invalid_argument("Backward: empty batch");
  ComparatorModel grad = ZerosLike(model);
  double total_n = 0.0;
  for (const PairRecord& r : batch.records) total_n += r.n;
  const size_t e = model.embedding_dim();

  if (use_item_cache) {
    std::vector<Trace> traces;
    traces.reserve(batch.slot_features.size());
    for (const auto& f : batch.slot_features) traces.push_back(RunBackbone(model, f));
    std::vector<std::vector<double>> upstream(traces.size(),
                                              std::vector<double>(e, 0.0));
    for (const PairRecord& r : batch.records) {
      const std::vector<double> v =
          Difference(model, traces[r.i].output, traces[r.j].output);
      const double m = Sigmoid(HubOutput(model, v));
      const double dh = r.n / total_n * (m - r.p);
      for (size_t k = 0; k < e; ++k) {
        grad.hub_weight[k] += dh * v[k];
        upstream[r.i][k] += dh * model.hub_weight[k];
        upstream[r.j][k] -= dh * model.hub_weight[k];
      }
    }
    for (size_t s = 0; s < traces.size(); ++s) {
      BackpropBackbone(model, traces[s], std::move(upstream[s]), grad);
    }
    return grad;
  }

  for (const PairRecord& r : batch.records) {
    const Trace ti = RunBackbone(model, batch.slot_features[r.i]);
    const Trace tj = RunBackbone(model, batch.slot_features[r.j]);
    const std::vector<double> v = Difference(model, ti.output, tj.output);
    const double m = Sigmoid(HubOutput(model, v));
    const double dh = r.n / total_n * (m - r.p);
    std::vector<double> up_i(e), up_j(e);
    for (size_t k = 0; k < e; ++k) {
      grad.hub_weight[k] += dh * v[k];
      up_i[k] = dh * model.hub_weight[k];
      up_j[k] = -dh * model.hub_weight[k];
    }
    BackpropBackbone(model, ti, std::move(up_i), grad);
    BackpropBackbone(model, tj, std::move(up_j), grad);
  }
  return grad;
}

double GradCheckAgainst(const ComparatorModel& model, const TrainBatch& batch,
                        const ComparatorModel& analytic, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("GradCheck: epsilon <= 0");
  ComparatorModel probe = model;
  ComparatorModel analytic_copy = analytic;
  auto blocks = ParameterBlocks(probe);
  auto grad_blocks = ParameterBlocks(analytic_copy);
  double worst = 0.0;
  for (size_t b = 0; b < blocks.size(); ++b) {
    for (size_t k = 0; k < blocks[b].values.size(); ++k) {
      double& theta = blocks[b].values[k];
      const double saved = theta;
      theta = saved + epsilon;
      const double up = BatchLoss(probe, batch);
      theta = saved - epsilon;
      const double down = BatchLoss(probe, batch);
      theta = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = grad_blocks[b].values[k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

double GradCheck(const ComparatorModel& model, const TrainBatch& batch,
                 double epsilon) {
  return GradCheckAgainst(model, batch, Backward(model, batch), epsilon);
}

TrainResult Train(ComparatorModel model, std::span<const PairRecord> records,
                  const std::vector<std::vector<double>>& features,
                  const TrainConfig& config) {
  model.CheckConsistent();
  if (!(config.lr_decay > 0.0 && config.lr_decay <= 1.0)) {
    throw UsageError("lr_decay must lie in (0, 1]");
  }
  if (config.batch_size == 0) throw UsageError("batch_size must be positive");

  std::vector<PairRecord> data;
  for (const PairRecord& r : records) {
    if (r.n < config.min_comparisons_threshold || !(r.n > 0.0)) continue;
    if (r.i >= features.size() || r.j >= features.size()) {
      throw DataError("record references unknown item");
    }
    if (features[r.i].size() != model.input_dim() ||
        features[r.j].size() != model.input_dim()) {
      throw DataError("feature dimension does not match model input dimension");
    }
    data.push_back(r.i < r.j ? r : r.Swapped());
  }
  if (data.empty()) {
    throw DataError("no training records left after applying threshold " +
                    std::to_string(config.min_comparisons_threshold));
  }

  Rng shuffle_rng(SubstreamSeed(config.seed, "train/shuffle"));
  Rng orient_rng(SubstreamSeed(config.seed, "train/orientation"));

  std::vector<ParamBlock> params = ParameterBlocks(model);
  std::vector<std::vector<double>> m1, m2;
  for (const ParamBlock& b : params) {
    m1.emplace_back(b.values.size(), 0.0);
    m2.emplace_back(b.values.size(), 0.0);
  }
  const AdamConfig& adam = config.adam;
  double beta1_pow = 1.0, beta2_pow = 1.0;

  const TrainBatch full = BuildBatch(data, features);
  TrainResult result;
  result.num_records = data.size();
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<PairRecord> chunk;
  double lr_scale = 1.0;
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.Shuffle(std::span<size_t>(order));
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(order.size(), start + config.batch_size);
      chunk.clear();
      for (size_t k = start; k < stop; ++k) {
        const PairRecord& r = data[order[k]];
        chunk.push_back(orient_rng.Bernoulli(0.5) ? r.Swapped() : r);
      }
      const TrainBatch batch = BuildBatch(chunk, features);
      ComparatorModel grad = Backward(model, batch);
      std::vector<ParamBlock> grads = ParameterBlocks(grad);
      beta1_pow *= adam.beta1;
      beta2_pow *= adam.beta2;
      for (size_t b = 0; b < params.size(); ++b) {
        const double lr =
            (params[b].hub ? config.lr_hub : config.lr_backbone) * lr_scale;
        for (size_t k = 0; k < params[b].values.size(); ++k) {
          const double g = grads[b].values[k];
          m1[b][k] = adam.beta1 * m1[b][k] + (1.0 - adam.beta1) * g;
          m2[b][k] = adam.beta2 * m2[b][k] + (1.0 - adam.beta2) * g * g;
          const double m_hat = m1[b][k] / (1.0 - beta1_pow);
          const double v_hat = m2[b][k] / (1.0 - beta2_pow);
          params[b].values[k] -= lr * m_hat / (std::sqrt(v_hat) + adam.epsilon);
        }
      }
    }
    lr_scale *= config.lr_decay;
    result.loss_history.push_back(BatchLoss(model, full));
  }
  result.model = std::move(model);
  return result;
}

}  // namespace pairscale
