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

#include "commands.h"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "experiment_config.h"
#include "pairscale/comparator.h"
#include "pairscale/comparison_matrix.h"
#include "pairscale/error.h"
#include "pairscale/inference.h"
#include "pairscale/io.h"
#include "pairscale/metrics.h"
#include "pairscale/observer.h"
#include "pairscale/random.h"
#include "pairscale/scaling.h"

namespace pairscale::tools {
namespace {

ExperimentConfig LoadConfig(const CommonOptions& common) {
  ExperimentConfig config =
      common.config ? LoadExperimentConfig(*common.config) : ExperimentConfig{};
  if (common.seed) config.seed = *common.seed;
  return config;
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t k = 0; k < parts.size(); ++k) {
    if (k > 0) out += sep;
    out += parts[k];
  }
  return out;
}

ComparisonMatrix LoadValidMatrix(const Path& path) {
  ComparisonMatrix matrix = LoadMatrix(path);
  const std::vector<std::string> problems = Validate(matrix);
  if (!problems.empty()) {
    throw DataError(path.string() + ": invalid matrix: " + Join(problems, "; "));
  }
  return matrix;
}

// Features for every matrix item, in matrix order.
std::vector<std::vector<double>> FeaturesForMatrix(const ComparisonMatrix& matrix,
                                                   const ItemSet& items,
                                                   const Path& source) {
  std::vector<std::vector<double>> rows;
  for (const std::string& id : matrix.item_ids()) {
    const std::optional<size_t> k = items.IndexOf(id);
    if (!k || items[*k].features.empty()) {
      throw DataError(source.string() + ": no features for item '" + id + "'");
    }
    rows.push_back(items[*k].features);
  }
  return rows;
}

void CheckFeatureDim(size_t found, size_t expected, const std::string& what) {
  if (found != expected) {
    throw DataError("feature dimension mismatch: " + what + " has " +
                    std::to_string(found) + " features, expected " +
                    std::to_string(expected));
  }
}

// Scene/attribute pairs of a manifest in name order; attribute unset
// selects every attribute.
std::vector<std::pair<std::string, SceneFiles>> SelectScenes(
    const Manifest& manifest, const std::optional<std::string>& attribute) {
  std::vector<std::pair<std::string, SceneFiles>> out;
  for (const auto& [scene, attributes] : manifest.scenes) {
    for (const auto& [name, files] : attributes) {
      if (!attribute || name == *attribute) out.emplace_back(scene, files);
    }
  }
  if (out.empty()) {
    throw DataError(attribute ? "no scene in the manifest has attribute '" + *attribute + "'"
                              : std::string("the manifest lists no scenes"));
  }
  return out;
}

void WriteEcho(const Path& path, const ExperimentConfig& config, std::string_view command) {
  WriteFile(path, ResolvedConfigJson(config, command));
}

Path WithSuffix(const Path& artifact, std::string_view suffix) {
  return artifact.parent_path() / (artifact.stem().string() + std::string(suffix));
}

}  // namespace

Path ConfigEchoPath(const Path& artifact) { return WithSuffix(artifact, ".config.json"); }

void RunScale(const ScaleOptions& options) {
  ExperimentConfig config = LoadConfig(options.common);
  if (options.method) config.inference.scaler = ParseScalerKind(*options.method);
  Resolve(config);
  const ComparisonMatrix matrix = LoadValidMatrix(options.input);
  JodScale scale;
  if (config.inference.scaler == ScalerKind::kMle) {
    MleDiagnostics diagnostics;
    scale = ScaleMle(matrix, config.inference.mle, &diagnostics);
    std::cerr << "mle: converged in " << diagnostics.iterations
              << " iterations, gradient norm " << diagnostics.gradient_norm << "\n";
  } else {
    const TrueSkillFit fit = ScaleTrueSkill(
        matrix, TrueSkillState::Initial(matrix.size(), config.inference.trueskill),
        config.inference.trueskill_passes, SubstreamSeed(config.seed, "scale/trueskill"));
    for (const std::string& w : fit.warnings) std::cerr << "warning: " << w << "\n";
    scale = fit.scale;
  }
  SaveScores(scale, options.output);
  WriteEcho(ConfigEchoPath(options.output), config, "scale");
}

void RunTrain(const TrainOptions& options) {
  ExperimentConfig config = LoadConfig(options.common);
  if (options.epochs) config.train.epochs = *options.epochs;
  if (options.threshold) config.train.min_comparisons_threshold = *options.threshold;
  Resolve(config);
  const Manifest manifest = LoadManifest(options.manifest);

  std::vector<std::vector<double>> features;
  std::vector<PairRecord> records;
  size_t dim = 0;
  uint64_t scene_index = 0;
  for (const auto& [scene, files] : SelectScenes(manifest, options.attribute)) {
    const ComparisonMatrix matrix = LoadValidMatrix(files.matrix);
    const std::vector<std::vector<double>> rows =
        FeaturesForMatrix(matrix, LoadFeatures(files.features), files.features);
    if (dim == 0) dim = rows.front().size();
    CheckFeatureDim(rows.front().size(), dim, "scene '" + scene + "'");
    const ComparisonMatrix kept =
        ThresholdFilter(matrix, config.train.min_comparisons_threshold);
    const size_t offset = features.size();
    for (PairRecord r : ToPairRecords(
             kept, SubstreamSeed(config.seed, "pair-orientation", scene_index++))) {
      r.i += offset;
      r.j += offset;
      records.push_back(r);
    }
    features.insert(features.end(), rows.begin(), rows.end());
  }
  if (records.empty()) {
    throw DataError("no training pairs left after the threshold of " +
                    FormatDouble(config.train.min_comparisons_threshold) + " comparisons");
  }
  if (config.architecture.input_dim == 0) config.architecture.input_dim = dim;
  CheckFeatureDim(dim, config.architecture.input_dim, "the training data");

  const ComparatorModel initial =
      InitializeModel(config.architecture, SubstreamSeed(config.seed, "train/init"));
  const TrainResult result = Train(initial, records, features, config.train);
  std::cerr << "train: " << result.num_records << " records, final loss "
            << FormatDouble(result.loss_history.back()) << "\n";
  const std::string echo = ResolvedConfigJson(config, "train");
  SaveModel(result.model, options.out, echo);
  WriteFile(WithSuffix(options.out, ".loss.csv"), LossHistoryToCsv(result.loss_history));
  WriteFile(ConfigEchoPath(options.out), echo);
}

void RunInfer(const InferOptions& options) {
  ExperimentConfig config = LoadConfig(options.common);
  InferenceConfig& inf = config.inference;
  if (options.strategy) inf.pair_strategy = ParsePairStrategy(*options.strategy);
  if (options.scaler) inf.scaler = ParseScalerKind(*options.scaler);
  if (options.comparisons) inf.c_comparisons = *options.comparisons;
  if (options.budget) inf.budget = *options.budget;
  Resolve(config);
  const bool single = options.query.has_value() || options.refs.has_value();
  if (single && !(options.query && options.refs)) {
    throw UsageError("single-item mode needs both --query and --refs");
  }
  if (single && options.emit_matrix) {
    throw UsageError("--emit-matrix applies to multi-item mode only");
  }

  const ComparatorModel model = LoadModel(options.model);
  const ItemSet items = LoadFeatures(options.items);
  for (const Item& item : items.items()) {
    CheckFeatureDim(item.features.size(), model.input_dim(), "item '" + item.id + "'");
  }

  if (single) {
    const JodScale ref_scores = LoadScores(*options.refs);
    ReferenceSet refs;
    for (size_t k = 0; k < ref_scores.item_ids.size(); ++k) {
      const std::optional<size_t> idx = items.IndexOf(ref_scores.item_ids[k]);
      if (!idx) {
        throw DataError("reference '" + ref_scores.item_ids[k] + "' is not in " +
                        options.items.string());
      }
      refs.references.push_back({items[*idx], ref_scores.scores[k]});
    }
    const std::optional<size_t> q = items.IndexOf(*options.query);
    if (!q) throw DataError("query '" + *options.query + "' is not in " + options.items.string());
    JodScale result;
    result.item_ids = {*options.query};
    result.scores = {ScoreSingle(model, items[*q], refs, inf)};
    WriteFile(options.out, ScoresToJson(result, kReferenceConvention));
  } else {
    ComparisonMatrix predicted;
    const JodScale scale = ScoreMulti(model, items, inf, &predicted);
    SaveScores(scale, options.out);
    if (options.emit_matrix) SaveMatrix(predicted, *options.emit_matrix);
  }
  WriteEcho(ConfigEchoPath(options.out), config, "infer");
}

void RunEval(const EvalOptions& options) {
  ExperimentConfig config = LoadConfig(options.common);
  Resolve(config);
  auto list = [](const Path& dir) {
    if (!std::filesystem::is_directory(dir)) {
      throw DataError("'" + dir.string() + "' is not a directory");
    }
    std::map<std::string, Path> scenes;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      const Path& p = entry.path();
      if (!entry.is_regular_file() || p.extension() != ".json") continue;
      const std::string stem = p.stem().string();
      if (stem.ends_with(".config")) continue;
      scenes.emplace(stem, p);
    }
    return scenes;
  };
  const std::map<std::string, Path> pred = list(options.pred);
  const std::map<std::string, Path> truth = list(options.truth);
  std::vector<std::string> only_pred, only_truth;
  for (const auto& [name, p] : pred) {
    if (truth.count(name) == 0) only_pred.push_back(name);
  }
  for (const auto& [name, p] : truth) {
    if (pred.count(name) == 0) only_truth.push_back(name);
  }
  if (!only_pred.empty() || !only_truth.empty()) {
    std::string msg = "scene sets differ";
    if (!only_pred.empty()) msg += "; only in predictions: " + Join(only_pred, ", ");
    if (!only_truth.empty()) msg += "; only in ground truth: " + Join(only_truth, ", ");
    throw DataError(msg);
  }
  if (pred.empty()) throw DataError("no scene score files found");
  std::map<std::string, SceneMetrics> per_scene;
  for (const auto& [name, path] : pred) {
    per_scene[name] = EvaluateScene(LoadScores(path), LoadScores(truth.at(name)));
  }
  const MetricsReport report = BuildReport(std::move(per_scene));
  WriteFile(options.out, ReportToJson(report));
  WriteFile(WithSuffix(options.out, ".csv"), ReportToCsv(report));
  WriteEcho(ConfigEchoPath(options.out), config, "eval");
}

void RunSimulate(const SimulateOptions& options) {
  ExperimentConfig config = LoadConfig(options.common);
  SimulateSettings& s = config.simulate;
  if (options.n) s.n = *options.n;
  if (options.design) s.design = ParseDesignKind(*options.design);
  if (options.extra_pairs) s.extra_pairs = *options.extra_pairs;
  if (options.k) s.comparisons_per_pair = *options.k;
  if (options.sigma) config.sigma_obs = *options.sigma;
  if (options.spread) s.spread = *options.spread;
  if (options.feature_dim) s.feature_dim = *options.feature_dim;
  if (options.feature_noise) s.feature_noise = *options.feature_noise;
  if (options.histogram_bins) s.histogram_bins = *options.histogram_bins;
  Resolve(config);

  const size_t width = std::to_string(s.n - 1).size();
  std::vector<std::string> ids;
  for (size_t k = 0; k < s.n; ++k) {
    std::string digits = std::to_string(k);
    ids.push_back("item" + std::string(width - digits.size(), '0') + digits);
  }
  Rng score_rng(SubstreamSeed(config.seed, "simulation/scores"));
  std::vector<double> scores(s.n);
  double mean = 0.0;
  for (double& v : scores) {
    v = s.spread * score_rng.Normal();
    mean += v;
  }
  mean /= static_cast<double>(s.n);
  for (double& v : scores) v -= mean;

  const size_t extra =
      s.design == DesignKind::kFull ? 0 : s.extra_pairs.value_or(s.n / 2);
  const Design design = MakeDesign(s.design, s.n, extra, s.comparisons_per_pair,
                                   SubstreamSeed(config.seed, "simulation/design"));
  ObserverConfig observer;
  observer.sigma_obs = config.sigma_obs;
  observer.rng_seed = SubstreamSeed(config.seed, "simulation/observer");
  const SimulatedMatrix sim = SimulateMatrix(ids, scores, design, observer);
  if (!sim.connected) std::cerr << "warning: the simulated comparison graph is disconnected\n";

  const Path& dir = options.out;
  SaveScores({ids, scores, {}}, dir / "true_scores.json");
  SaveMatrix(sim.matrix, dir / "matrix.csv");
  WriteFile(dir / "histogram.csv",
            HistogramToCsv(ProbabilityHistogram(sim.matrix, s.histogram_bins)));
  WriteFile(dir / "design.json", DesignToJson(design));
  if (s.feature_dim > 0) {
    Rng feature_rng(SubstreamSeed(config.seed, "simulation/features"));
    std::vector<Item> items;
    for (size_t k = 0; k < s.n; ++k) {
      std::vector<double> f(s.feature_dim);
      f[0] = scores[k] + s.feature_noise * feature_rng.Normal();
      for (size_t d = 1; d < s.feature_dim; ++d) f[d] = feature_rng.Normal();
      items.push_back({ids[k], std::move(f)});
    }
    SaveFeatures(ItemSet(std::move(items)), dir / "features.csv");
  }
  WriteEcho(dir / "config.json", config, "simulate");
}

void RunCalibrate(const CalibrateOptions& options) {
  ExperimentConfig config = LoadConfig(options.common);
  if (options.min_comparisons) config.calibrate.min_comparisons = *options.min_comparisons;
  Resolve(config);
  const ComparatorModel model = LoadModel(options.model);
  const Manifest manifest = LoadManifest(options.manifest);
  std::vector<double> predictions, ground_truth;
  for (const auto& [scene, files] : SelectScenes(manifest, options.attribute)) {
    const ComparisonMatrix matrix = LoadValidMatrix(files.matrix);
    const std::vector<std::vector<double>> rows =
        FeaturesForMatrix(matrix, LoadFeatures(files.features), files.features);
    CheckFeatureDim(rows.front().size(), model.input_dim(), "scene '" + scene + "'");
    for (size_t i = 0; i < matrix.size(); ++i) {
      for (size_t j = i + 1; j < matrix.size(); ++j) {
        const double n = matrix.total(i, j);
        if (n <= 0.0 || n < config.calibrate.min_comparisons) continue;
        predictions.push_back(Forward(model, rows[i], rows[j]));
        ground_truth.push_back(matrix.count(i, j) / n);
      }
    }
  }
  if (predictions.empty()) throw DataError("no pairs to calibrate on");
  WriteFile(options.out, CalibrationToCsv(Calibration(predictions, ground_truth)));
  WriteEcho(ConfigEchoPath(options.out), config, "calibrate");
}

}  // namespace pairscale::tools
