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

// pairscale: scaling, training, inference and evaluation from the shell.
// Exit codes: 0 success, 1 usage or config error, 2 data or domain error.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "pairscale/error.h"

namespace {

using pairscale::tools::CommonOptions;

void AddCommon(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--config", common.config, "JSON experiment config; flags override it");
  cmd->add_option("--seed", common.seed, "Root seed for every random sub-stream");
}

}  // namespace

int main(int argc, char** argv) {
  namespace tools = pairscale::tools;
  CLI::App app{"Pairwise comparison scaling and comparator tooling.", "pairscale"};
  app.require_subcommand(1, 1);
  std::function<void()> run;

  tools::ScaleOptions scale;
  CLI::App* scale_cmd = app.add_subcommand("scale", "Scale a comparison matrix to JOD scores");
  scale_cmd->add_option("--input", scale.input, "Comparison matrix CSV")->required();
  scale_cmd->add_option("--output", scale.output, "Scores JSON to write")->required();
  scale_cmd->add_option("--method", scale.method, "trueskill or mle (default trueskill)");
  AddCommon(scale_cmd, scale.common);
  scale_cmd->callback([&] { run = [&] { tools::RunScale(scale); }; });

  tools::TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a pairwise comparator");
  train_cmd->add_option("--manifest", train.manifest, "Scene manifest JSON")->required();
  train_cmd->add_option("--attribute", train.attribute, "Attribute to train on")->required();
  train_cmd->add_option("--out", train.out,
                        "Checkpoint JSON; <stem>.loss.csv is written next to it")
      ->required();
  train_cmd->add_option("--epochs", train.epochs, "Override train.epochs");
  train_cmd->add_option("--threshold", train.threshold,
                        "Override train.min_comparisons_threshold");
  AddCommon(train_cmd, train.common);
  train_cmd->callback([&] { run = [&] { tools::RunTrain(train); }; });

  tools::InferOptions infer;
  CLI::App* infer_cmd = app.add_subcommand("infer", "Score items with a trained comparator");
  infer_cmd->add_option("--model", infer.model, "Checkpoint JSON")->required();
  infer_cmd->add_option("--items", infer.items, "Features CSV")->required();
  infer_cmd->add_option("--out", infer.out, "Scores JSON to write")->required();
  infer_cmd->add_option("--emit-matrix", infer.emit_matrix,
                        "Also write the reconstructed comparison matrix");
  infer_cmd->add_option("--query", infer.query,
                        "Single-item mode: id of the item to score");
  infer_cmd->add_option("--refs", infer.refs,
                        "Single-item mode: scores JSON of the reference items");
  infer_cmd->add_option("--strategy", infer.strategy,
                        "Override inference.pair_strategy (full, chain_plus_random, active)");
  infer_cmd->add_option("--scaler", infer.scaler, "Override inference.scaler");
  infer_cmd->add_option("--comparisons", infer.comparisons,
                        "Override inference.c_comparisons");
  infer_cmd->add_option("--budget", infer.budget, "Override inference.budget");
  AddCommon(infer_cmd, infer.common);
  infer_cmd->callback([&] { run = [&] { tools::RunInfer(infer); }; });

  tools::EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Compare predicted and true scene scores");
  eval_cmd->add_option("--pred", eval.pred, "Directory of <scene>.json predictions")->required();
  eval_cmd->add_option("--truth", eval.truth, "Directory of <scene>.json ground truth")
      ->required();
  eval_cmd->add_option("--out", eval.out,
                       "Report JSON; <stem>.csv is written next to it")
      ->required();
  AddCommon(eval_cmd, eval.common);
  eval_cmd->callback([&] { run = [&] { tools::RunEval(eval); }; });

  tools::SimulateOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Simulate a Thurstone observer experiment");
  sim_cmd->add_option("--n", sim.n, "Number of items");
  sim_cmd->add_option("--design", sim.design, "full or chain_plus_random");
  sim_cmd->add_option("--extra-pairs", sim.extra_pairs,
                      "Random pairs added to the chain (default n/2)");
  sim_cmd->add_option("--k", sim.k, "Comparisons per design pair");
  sim_cmd->add_option("--sigma", sim.sigma, "Observer noise standard deviation");
  sim_cmd->add_option("--spread", sim.spread, "Standard deviation of the true scores");
  sim_cmd->add_option("--features", sim.feature_dim,
                      "Write features.csv with this many columns (0 = none)");
  sim_cmd->add_option("--feature-noise", sim.feature_noise,
                      "Noise on the score-carrying feature");
  sim_cmd->add_option("--bins", sim.histogram_bins, "Probability histogram bins");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  AddCommon(sim_cmd, sim.common);
  sim_cmd->callback([&] { run = [&] { tools::RunSimulate(sim); }; });

  tools::CalibrateOptions cal;
  CLI::App* cal_cmd =
      app.add_subcommand("calibrate", "Six-bin calibration table of a comparator");
  cal_cmd->add_option("--model", cal.model, "Checkpoint JSON")->required();
  cal_cmd->add_option("--manifest", cal.manifest, "Scene manifest JSON")->required();
  cal_cmd->add_option("--attribute", cal.attribute, "Restrict to one attribute");
  cal_cmd->add_option("--min-comparisons", cal.min_comparisons,
                      "Override calibrate.min_comparisons");
  cal_cmd->add_option("--out", cal.out, "Calibration CSV")->required();
  AddCommon(cal_cmd, cal.common);
  cal_cmd->callback([&] { run = [&] { tools::RunCalibrate(cal); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    run();
  } catch (const pairscale::UsageError& e) {
    std::cerr << "pairscale: error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "pairscale: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pairscale: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
