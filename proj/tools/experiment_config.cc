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

#include "experiment_config.h"

#include <cmath>
#include <concepts>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pairscale/error.h"
#include "pairscale/io.h"

namespace pairscale::tools {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Walks one JSON object, remembering which keys were consumed so that
// Finish() can reject the rest.
class Section {
 public:
  Section(const Json& value, std::string path, std::string_view source)
      : value_(value), path_(std::move(path)), source_(source) {
    if (!value_.is_object()) Fail(path_.empty() ? "config" : path_, "an object");
  }

  bool Has(const char* key) {
    if (!value_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  bool HasNonNull(const char* key) { return Has(key) && !value_.at(key).is_null(); }

  void Read(const char* key, double& out) {
    if (!Has(key)) return;
    const Json& v = value_.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) Fail(key, "a finite number");
    out = v.get<double>();
  }

  template <std::unsigned_integral T>
  void Read(const char* key, T& out) {
    if (!Has(key)) return;
    const Json& v = value_.at(key);
    if (!v.is_number_unsigned() &&
        !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
      Fail(key, "a non-negative integer");
    }
    out = v.get<T>();
  }

  void Read(const char* key, std::string& out) {
    if (!Has(key)) return;
    const Json& v = value_.at(key);
    if (!v.is_string()) Fail(key, "a string");
    out = v.get<std::string>();
  }

  void Read(const char* key, std::vector<size_t>& out) {
    if (!Has(key)) return;
    const Json& v = value_.at(key);
    if (!v.is_array()) Fail(key, "an array of non-negative integers");
    out.clear();
    for (const Json& e : v) {
      if (!e.is_number_unsigned() &&
          !(e.is_number_integer() && e.get<int64_t>() >= 0)) {
        Fail(key, "an array of non-negative integers");
      }
      out.push_back(e.get<size_t>());
    }
  }

  // Reads a name and converts it with parse, which throws UsageError for
  // unknown names.
  template <typename T, typename Parse>
  void ReadEnum(const char* key, T& out, Parse parse) {
    std::string name;
    if (!Has(key)) return;
    Read(key, name);
    try {
      out = parse(name);
    } catch (const UsageError& e) {
      throw UsageError(std::string(source_) + ": " + Path(key) + ": " + e.what());
    }
  }

  void ReadChild(const char* key, const std::function<void(Section&)>& body) {
    if (!Has(key)) return;
    Section child(value_.at(key), Path(key), source_);
    body(child);
    child.Finish();
  }

  void Finish() const {
    for (const auto& [key, unused] : value_.items()) {
      if (seen_.count(key) == 0) {
        throw UsageError(std::string(source_) + ": unknown key '" + Path(key) + "'");
      }
    }
  }

 private:
  std::string Path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  [[noreturn]] void Fail(std::string_view key, std::string_view expected) const {
    const std::string where = key == path_ ? std::string(key) : Path(key);
    throw UsageError(std::string(source_) + ": '" + where + "' must be " +
                     std::string(expected));
  }

  const Json& value_;
  std::string path_;
  std::string_view source_;
  std::set<std::string, std::less<>> seen_;
};

void Require(bool ok, const std::string& what) {
  if (!ok) throw UsageError("invalid config: " + what);
}

void Validate(const ExperimentConfig& c) {
  Require(c.sigma_obs > 0.0, "observer.sigma_obs must be positive");
  const TrueSkillParams& ts = c.inference.trueskill;
  Require(ts.sigma0 > 0.0 && ts.beta > 0.0 && ts.tau >= 0.0,
          "trueskill sigma0 and beta must be positive, tau non-negative");
  Require(c.inference.trueskill_passes >= 1, "trueskill.passes must be >= 1");
  const MleScalerConfig& mle = c.inference.mle;
  Require(mle.prior_pseudocount >= 0.0, "mle.prior_pseudocount must be >= 0");
  Require(mle.max_iterations >= 1, "mle.max_iterations must be >= 1");
  Require(mle.gradient_tolerance > 0.0 && mle.initial_step > 0.0,
          "mle.gradient_tolerance and mle.initial_step must be positive");
  Require(mle.backtrack_factor > 0.0 && mle.backtrack_factor < 1.0,
          "mle.backtrack_factor must lie in (0, 1)");
  Require(mle.armijo > 0.0 && mle.armijo < 1.0, "mle.armijo must lie in (0, 1)");
  const TrainConfig& t = c.train;
  Require(t.lr_backbone > 0.0 && t.lr_hub > 0.0, "learning rates must be positive");
  Require(t.lr_decay > 0.0 && t.lr_decay <= 1.0, "train.lr_decay must lie in (0, 1]");
  Require(t.epochs >= 1 && t.batch_size >= 1, "train.epochs and train.batch_size must be >= 1");
  Require(t.min_comparisons_threshold >= 0.0, "train.min_comparisons_threshold must be >= 0");
  Require(t.adam.beta1 >= 0.0 && t.adam.beta1 < 1.0 && t.adam.beta2 >= 0.0 &&
              t.adam.beta2 < 1.0 && t.adam.epsilon > 0.0,
          "train.adam betas must lie in [0, 1) and epsilon must be positive");
  Require(c.architecture.embedding_dim >= 1, "architecture.embedding_dim must be >= 1");
  for (size_t w : c.architecture.hidden) Require(w >= 1, "architecture.hidden widths must be >= 1");
  const InferenceConfig& inf = c.inference;
  Require(inf.c_comparisons > 0.0, "inference.c_comparisons must be positive");
  Require(inf.active_round_size >= 1, "inference.active_round_size must be >= 1");
  const SimulateSettings& s = c.simulate;
  Require(s.n >= 2, "simulate.n must be >= 2");
  Require(s.comparisons_per_pair >= 1, "simulate.comparisons_per_pair must be >= 1");
  Require(s.spread >= 0.0 && s.feature_noise >= 0.0,
          "simulate.spread and simulate.feature_noise must be >= 0");
  Require(s.histogram_bins >= 1, "simulate.histogram_bins must be >= 1");
  Require(c.calibrate.min_comparisons >= 0.0, "calibrate.min_comparisons must be >= 0");
}

}  // namespace

ExperimentConfig ParseExperimentConfig(std::string_view text,
                                       std::string_view source) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw UsageError(std::string(source) + ": invalid JSON: " + e.what());
  }
  ExperimentConfig c;
  Section top(root, "", source);
  if (top.Has("format")) {
    std::string format;
    top.Read("format", format);
    if (format != kConfigFormat) {
      throw UsageError(std::string(source) + ": unsupported config format '" +
                       format + "'");
    }
  }
  // Echo-only keys written by ResolvedConfigJson.
  top.Has("command");
  top.Has("formats");
  top.Read("seed", c.seed);
  top.ReadChild("observer", [&](Section& s) { s.Read("sigma_obs", c.sigma_obs); });
  top.ReadChild("trueskill", [&](Section& s) {
    s.Read("mu0", c.inference.trueskill.mu0);
    s.Read("sigma0", c.inference.trueskill.sigma0);
    s.Read("beta", c.inference.trueskill.beta);
    s.Read("tau", c.inference.trueskill.tau);
    s.Read("passes", c.inference.trueskill_passes);
  });
  top.ReadChild("mle", [&](Section& s) {
    MleScalerConfig& m = c.inference.mle;
    s.Read("prior_pseudocount", m.prior_pseudocount);
    s.Read("max_iterations", m.max_iterations);
    s.Read("gradient_tolerance", m.gradient_tolerance);
    s.Read("initial_step", m.initial_step);
    s.Read("backtrack_factor", m.backtrack_factor);
    s.Read("armijo", m.armijo);
  });
  top.ReadChild("train", [&](Section& s) {
    TrainConfig& t = c.train;
    s.Read("lr_backbone", t.lr_backbone);
    s.Read("lr_hub", t.lr_hub);
    s.Read("lr_decay", t.lr_decay);
    s.Read("epochs", t.epochs);
    s.Read("batch_size", t.batch_size);
    s.Read("min_comparisons_threshold", t.min_comparisons_threshold);
    s.ReadChild("adam", [&](Section& a) {
      a.Read("beta1", t.adam.beta1);
      a.Read("beta2", t.adam.beta2);
      a.Read("epsilon", t.adam.epsilon);
    });
    s.ReadChild("architecture", [&](Section& a) {
      ModelArchitecture& m = c.architecture;
      a.Read("input_dim", m.input_dim);
      a.Read("hidden", m.hidden);
      a.Read("embedding_dim", m.embedding_dim);
      a.ReadEnum("hidden_activation", m.hidden_activation, ParseActivation);
      a.ReadEnum("embedding_activation", m.embedding_activation, ParseActivation);
    });
  });
  top.ReadChild("inference", [&](Section& s) {
    InferenceConfig& i = c.inference;
    s.Read("c_comparisons", i.c_comparisons);
    s.ReadEnum("pair_strategy", i.pair_strategy, ParsePairStrategy);
    s.ReadEnum("scaler", i.scaler, ParseScalerKind);
    s.Read("budget", i.budget);
    s.Read("active_round_size", i.active_round_size);
    s.ReadEnum("single_mode", i.single_mode, ParseSingleMode);
  });
  top.ReadChild("simulate", [&](Section& s) {
    SimulateSettings& m = c.simulate;
    s.Read("n", m.n);
    s.ReadEnum("design", m.design, ParseDesignKind);
    if (s.HasNonNull("extra_pairs")) {
      size_t extra = 0;
      s.Read("extra_pairs", extra);
      m.extra_pairs = extra;
    }
    s.Read("comparisons_per_pair", m.comparisons_per_pair);
    s.Read("spread", m.spread);
    s.Read("feature_dim", m.feature_dim);
    s.Read("feature_noise", m.feature_noise);
    s.Read("histogram_bins", m.histogram_bins);
  });
  top.ReadChild("calibrate", [&](Section& s) {
    s.Read("min_comparisons", c.calibrate.min_comparisons);
  });
  top.Finish();
  Validate(c);
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  return ParseExperimentConfig(text, path.string());
}

void Resolve(ExperimentConfig& config) {
  Validate(config);
  config.train.seed = config.seed;
  config.inference.seed = config.seed;
  config.inference.mle.sigma_obs = config.sigma_obs;
}

std::string ResolvedConfigJson(const ExperimentConfig& c, std::string_view command) {
  OrderedJson j;
  j["format"] = kConfigFormat;
  j["command"] = command;
  j["formats"] = {{"matrix", kMatrixFormat},   {"features", kFeaturesFormat},
                  {"scores", kScoresFormat},   {"manifest", kManifestFormat},
                  {"model", kModelFormat},     {"design", kDesignFormat},
                  {"report", kReportFormat},   {"calibration", kCalibrationFormat},
                  {"histogram", kHistogramFormat}, {"loss", kLossFormat}};
  j["seed"] = c.seed;
  j["observer"] = {{"sigma_obs", c.sigma_obs}};
  const TrueSkillParams& ts = c.inference.trueskill;
  j["trueskill"] = {{"mu0", ts.mu0},   {"sigma0", ts.sigma0}, {"beta", ts.beta},
                    {"tau", ts.tau},   {"passes", c.inference.trueskill_passes}};
  const MleScalerConfig& m = c.inference.mle;
  j["mle"] = {{"prior_pseudocount", m.prior_pseudocount},
              {"max_iterations", m.max_iterations},
              {"gradient_tolerance", m.gradient_tolerance},
              {"initial_step", m.initial_step},
              {"backtrack_factor", m.backtrack_factor},
              {"armijo", m.armijo}};
  const TrainConfig& t = c.train;
  const ModelArchitecture& a = c.architecture;
  j["train"] = {
      {"lr_backbone", t.lr_backbone},
      {"lr_hub", t.lr_hub},
      {"lr_decay", t.lr_decay},
      {"epochs", t.epochs},
      {"batch_size", t.batch_size},
      {"min_comparisons_threshold", t.min_comparisons_threshold},
      {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}}},
      {"architecture",
       {{"input_dim", a.input_dim},
        {"hidden", a.hidden},
        {"embedding_dim", a.embedding_dim},
        {"hidden_activation", ActivationName(a.hidden_activation)},
        {"embedding_activation", ActivationName(a.embedding_activation)}}}};
  const InferenceConfig& i = c.inference;
  j["inference"] = {{"c_comparisons", i.c_comparisons},
                    {"pair_strategy", PairStrategyName(i.pair_strategy)},
                    {"scaler", ScalerKindName(i.scaler)},
                    {"budget", i.budget},
                    {"active_round_size", i.active_round_size},
                    {"single_mode", SingleModeName(i.single_mode)}};
  const SimulateSettings& s = c.simulate;
  j["simulate"] = {{"n", s.n},
                   {"design", DesignKindName(s.design)},
                   {"extra_pairs", s.extra_pairs ? OrderedJson(*s.extra_pairs) : OrderedJson()},
                   {"comparisons_per_pair", s.comparisons_per_pair},
                   {"spread", s.spread},
                   {"feature_dim", s.feature_dim},
                   {"feature_noise", s.feature_noise},
                   {"histogram_bins", s.histogram_bins}};
  j["calibrate"] = {{"min_comparisons", c.calibrate.min_comparisons}};
  return j.dump(2) + "\n";
}

}  // namespace pairscale::tools
