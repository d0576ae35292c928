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

#ifndef PAIRSCALE_SCALING_H_
#define PAIRSCALE_SCALING_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pairscale/comparison_matrix.h"
#include "pairscale/observer.h"

namespace pairscale {

// Per-item quality scores in just-objectionable-difference units. The
// scale is translation invariant; scalers return it with zero mean.
struct JodScale {
  std::vector<std::string> item_ids;
  std::vector<double> scores;
  // Per-item uncertainty in JOD units. Either empty or one per item.
  std::vector<double> sigmas;

  double Mean() const;
};

// ---------------------------------------------------------------------------
// TrueSkill replay.
// ---------------------------------------------------------------------------

struct TrueSkillParams {
  double mu0 = 25.0;
  double sigma0 = 25.0 / 3.0;
  double beta = 25.0 / 6.0;
  double tau = 0.0;
};

struct TrueSkillState {
  std::vector<double> mu;
  std::vector<double> sigma;
  double beta = 25.0 / 6.0;
  double tau = 0.0;
  double mu0 = 25.0;
  double sigma0 = 25.0 / 3.0;

  static TrueSkillState Initial(size_t num_items,
                                const TrueSkillParams& params = {});
  size_t size() const { return mu.size(); }
};

// Two-player, no-draw update after winner beat loser.
TrueSkillState TrueSkillUpdate(const TrueSkillState& state, size_t winner,
                               size_t loser);

// In-place update where item a beats item b with weight q in [0, 1]: the
// posterior means and variances are the q-weighted mixture of the two
// single-outcome updates. q = 1 (or 0) is an ordinary update.
void ApplyTrueSkillOutcome(TrueSkillState& state, size_t a, size_t b, double q);

// Multiplier from TrueSkill mu units to JOD: a mu gap of
// sqrt(2) * beta * InverseNormalCdf(0.75) (the 75% preference distance)
// maps to kTrueSkillJodGain JOD.
extern const double kTrueSkillJodGain;
double TrueSkillMuPerJod(double beta);

struct TrueSkillFit {
  // Zero mean within every connected component.
  JodScale scale;
  TrueSkillState state;
  std::vector<std::vector<size_t>> components;
  std::vector<std::string> warnings;
};

// Expands the matrix into individual win events and replays them in
// seeded random order for the requested number of passes. Event order is
// canonicalized by item id before shuffling, so relabeling the items
// permutes the result and nothing else.
//
// Fractional counts: a pair with n_ij comparisons becomes round(n_ij)
// events split in proportion to p_ij; a leftover fraction becomes one
// probability-weighted update (ApplyTrueSkillOutcome).
//
// Throws DataError when the matrix holds no comparisons. A disconnected
// graph is scaled per component and reported in warnings.
TrueSkillFit ScaleTrueSkill(const ComparisonMatrix& matrix,
                            const TrueSkillState& initial, size_t passes,
                            uint64_t seed);

// ---------------------------------------------------------------------------
// Maximum-likelihood Thurstone Case V scaling.
// ---------------------------------------------------------------------------

struct MleScalerConfig {
  // Added to both directions of every observed pair.
  double prior_pseudocount = 0.5;
  size_t max_iterations = 20000;
  double gradient_tolerance = 1e-8;
  double sigma_obs = kDefaultSigmaObs;
  // Backtracking line search.
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  double armijo = 1e-4;
};

struct MleDiagnostics {
  size_t iterations = 0;
  double gradient_norm = 0.0;
};

// Maximizes the coefficient-free binomial log-likelihood under the
// Gaussian link by gradient ascent with backtracking line search. Throws
// DataError for a disconnected comparison graph (message names the
// components) and on non-convergence (message carries the final gradient
// norm).
JodScale ScaleMle(const ComparisonMatrix& matrix, const MleScalerConfig& config,
                  MleDiagnostics* diagnostics = nullptr);

// sum_{i<j} c_ij log Phi(d_ij) + c_ji log Phi(-d_ij), with
// d_ij = (s_i - s_j) / (sigma_obs sqrt 2). Scores are matched by item id;
// throws DataError when the id sets differ.
double LogLikelihood(const JodScale& scores, const ComparisonMatrix& matrix,
                     double sigma_obs = kDefaultSigmaObs);

// Same, with scores indexed like the matrix.
double LogLikelihood(const std::vector<double>& scores,
                     const ComparisonMatrix& matrix, double sigma_obs);
std::vector<double> LogLikelihoodGradient(const std::vector<double>& scores,
                                          const ComparisonMatrix& matrix,
                                          double sigma_obs);

// Copy of the matrix with pseudocount added to both directions of every
// observed pair.
ComparisonMatrix AddPseudocounts(const ComparisonMatrix& matrix,
                                 double pseudocount);

// predicted shifted by a constant so its mean equals the reference mean.
// Throws DataError when the id sets differ.
JodScale AlignScores(const JodScale& predicted, const JodScale& reference);

// reference.scores reordered to follow predicted.item_ids. Throws DataError
// when the id sets differ.
std::vector<double> MatchScores(const JodScale& predicted,
                                const JodScale& reference);

}  // namespace pairscale

#endif  // PAIRSCALE_SCALING_H_
