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

#include "pairscale/scaling.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "pairscale/error.h"
#include "pairscale/gaussian.h"
#include "pairscale/random.h"

namespace pairscale {

double JodScale::Mean() const {
  if (scores.empty()) return 0.0;
  return std::accumulate(scores.begin(), scores.end(), 0.0) /
         static_cast<double>(scores.size());
}

namespace {

void CenterInPlace(std::vector<double>& v) {
  if (v.empty()) return;
  const double mean =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

std::string DescribeComponents(const ComparisonMatrix& matrix,
                               const std::vector<std::vector<size_t>>& comps) {
  std::ostringstream os;
  for (size_t c = 0; c < comps.size(); ++c) {
    if (c > 0) os << ' ';
    os << '{';
    for (size_t k = 0; k < comps[c].size(); ++k) {
      if (k > 0) os << ',';
      os << matrix.item_ids()[comps[c][k]];
    }
    os << '}';
  }
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// TrueSkill.
// ---------------------------------------------------------------------------

// Slope correction between the 75%-distance conversion and the MLE scale.
// Dense synthetic matrices put the measured slope within 1% of one.
const double kTrueSkillJodGain = 1.0;

double TrueSkillMuPerJod(double beta) {
  return std::numbers::sqrt2 * beta * InverseNormalCdf(0.75) / kTrueSkillJodGain;
}

TrueSkillState TrueSkillState::Initial(size_t num_items,
                                       const TrueSkillParams& params) {
  TrueSkillState s;
  s.mu.assign(num_items, params.mu0);
  s.sigma.assign(num_items, params.sigma0);
  s.beta = params.beta;
  s.tau = params.tau;
  s.mu0 = params.mu0;
  s.sigma0 = params.sigma0;
  return s;
}

namespace {

struct UpdateResult {
  double mu_w, mu_l, var_w, var_l;
};

UpdateResult ComputeUpdate(double mu_w, double var_w, double mu_l,
                           double var_l, double beta) {
  const double c2 = 2.0 * beta * beta + var_w + var_l;
  const double c = std::sqrt(c2);
  const double t = (mu_w - mu_l) / c;
  const double v = InverseMillsRatio(t);
  const double w = v * (v + t);
  return {mu_w + var_w / c * v, mu_l - var_l / c * v,
          var_w * (1.0 - var_w / c2 * w), var_l * (1.0 - var_l / c2 * w)};
}

}  // namespace

void ApplyTrueSkillOutcome(TrueSkillState& state, size_t a, size_t b,
                           double q) {
  const double tau2 = state.tau * state.tau;
  const double var_a = state.sigma[a] * state.sigma[a] + tau2;
  const double var_b = state.sigma[b] * state.sigma[b] + tau2;
  if (q >= 1.0) {
    const UpdateResult r =
        ComputeUpdate(state.mu[a], var_a, state.mu[b], var_b, state.beta);
    state.mu[a] = r.mu_w;
    state.mu[b] = r.mu_l;
    state.sigma[a] = std::sqrt(r.var_w);
    state.sigma[b] = std::sqrt(r.var_l);
    return;
  }
  if (q <= 0.0) {
    const UpdateResult r =
        ComputeUpdate(state.mu[b], var_b, state.mu[a], var_a, state.beta);
    state.mu[b] = r.mu_w;
    state.mu[a] = r.mu_l;
    state.sigma[b] = std::sqrt(r.var_w);
    state.sigma[a] = std::sqrt(r.var_l);
    return;
  }
  const UpdateResult a_wins =
      ComputeUpdate(state.mu[a], var_a, state.mu[b], var_b, state.beta);
  const UpdateResult b_wins =
      ComputeUpdate(state.mu[b], var_b, state.mu[a], var_a, state.beta);
  state.mu[a] = q * a_wins.mu_w + (1.0 - q) * b_wins.mu_l;
  state.mu[b] = q * a_wins.mu_l + (1.0 - q) * b_wins.mu_w;
  state.sigma[a] = std::sqrt(q * a_wins.var_w + (1.0 - q) * b_wins.var_l);
  state.sigma[b] = std::sqrt(q * a_wins.var_l + (1.0 - q) * b_wins.var_w);
}

TrueSkillState TrueSkillUpdate(const TrueSkillState& state, size_t winner,
                               size_t loser) {
  if (winner == loser) {
    throw std::invalid_argument("TrueSkillUpdate: winner == loser");
  }
  TrueSkillState next = state;
  ApplyTrueSkillOutcome(next, winner, loser, 1.0);
  return next;
}

namespace {

struct WinEvent {
  size_t a;
  size_t b;
  // Weight of "a beats b"; 1 and 0 are plain outcomes.
  double q;
};

std::vector<WinEvent> ExpandEvents(const ComparisonMatrix& matrix) {
  const auto& ids = matrix.item_ids();
  struct Pair {
    size_t a, b;
  };
  std::vector<Pair> pairs;
  for (size_t i = 0; i < matrix.size(); ++i) {
    for (size_t j = i + 1; j < matrix.size(); ++j) {
      if (matrix.total(i, j) <= 0.0) continue;
      // Orient by id so the event list does not depend on item order.
      if (ids[i] < ids[j]) {
        pairs.push_back({i, j});
      } else {
        pairs.push_back({j, i});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& x, const Pair& y) {
    if (ids[x.a] != ids[y.a]) return ids[x.a] < ids[y.a];
    return ids[x.b] < ids[y.b];
  });

  std::vector<WinEvent> events;
  for (const Pair& pr : pairs) {
    const double wins_a = matrix.count(pr.a, pr.b);
    const double n = matrix.total(pr.a, pr.b);
    const double events_total = std::max(1.0, std::round(n));
    double target_a = wins_a * events_total / n;
    if (std::abs(target_a - std::round(target_a)) < 1e-9) {
      target_a = std::round(target_a);
    }
    const double whole_a = std::floor(target_a);
    const double frac = target_a - whole_a;
    const double whole_b = events_total - whole_a - (frac > 0.0 ? 1.0 : 0.0);
    for (double k = 0; k < whole_a; k += 1.0) events.push_back({pr.a, pr.b, 1.0});
    for (double k = 0; k < whole_b; k += 1.0) events.push_back({pr.a, pr.b, 0.0});
    if (frac > 0.0) events.push_back({pr.a, pr.b, frac});
  }
  return events;
}

}  // namespace

TrueSkillFit ScaleTrueSkill(const ComparisonMatrix& matrix,
                            const TrueSkillState& initial, size_t passes,
                            uint64_t seed) {
  if (initial.size() != matrix.size()) {
    throw std::invalid_argument("ScaleTrueSkill: state/matrix size mismatch");
  }
  if (passes == 0) throw std::invalid_argument("ScaleTrueSkill: passes == 0");
  if (!(matrix.TotalComparisons() > 0.0)) {
    throw DataError("cannot scale a matrix with zero total comparisons");
  }
  TrueSkillFit fit;
  fit.state = initial;
  std::vector<WinEvent> events = ExpandEvents(matrix);
  Rng rng(seed);
  for (size_t pass = 0; pass < passes; ++pass) {
    rng.Shuffle(std::span<WinEvent>(events));
    for (const WinEvent& e : events) ApplyTrueSkillOutcome(fit.state, e.a, e.b, e.q);
  }

  fit.components = ConnectedComponents(matrix);
  if (fit.components.size() > 1) {
    fit.warnings.push_back(
        "comparison graph has " + std::to_string(fit.components.size()) +
        " components, scaled separately: " +
        DescribeComponents(matrix, fit.components));
  }
  const double mu_per_jod = TrueSkillMuPerJod(fit.state.beta);
  fit.scale.item_ids = matrix.item_ids();
  fit.scale.scores.assign(matrix.size(), 0.0);
  fit.scale.sigmas.assign(matrix.size(), 0.0);
  const auto& ids = matrix.item_ids();
  for (const auto& comp : fit.components) {
    // Summed in id order so relabeling the items cannot change a bit.
    std::vector<size_t> by_id = comp;
    std::sort(by_id.begin(), by_id.end(),
              [&](size_t x, size_t y) { return ids[x] < ids[y]; });
    double mean = 0.0;
    for (size_t i : by_id) mean += fit.state.mu[i];
    mean /= static_cast<double>(comp.size());
    for (size_t i : comp) {
      fit.scale.scores[i] = (fit.state.mu[i] - mean) / mu_per_jod;
      fit.scale.sigmas[i] = fit.state.sigma[i] / mu_per_jod;
    }
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Maximum likelihood.
// ---------------------------------------------------------------------------

double LogLikelihood(const std::vector<double>& scores,
                     const ComparisonMatrix& matrix, double sigma_obs) {
  const double kappa = sigma_obs * std::numbers::sqrt2;
  double ll = 0.0;
  for (size_t i = 0; i < matrix.size(); ++i) {
    for (size_t j = i + 1; j < matrix.size(); ++j) {
      const double cij = matrix.count(i, j);
      const double cji = matrix.count(j, i);
      if (cij == 0.0 && cji == 0.0) continue;
      const double d = (scores[i] - scores[j]) / kappa;
      if (cij != 0.0) ll += cij * LogNormalCdf(d);
      if (cji != 0.0) ll += cji * LogNormalCdf(-d);
    }
  }
  return ll;
}

std::vector<double> LogLikelihoodGradient(const std::vector<double>& scores,
                                          const ComparisonMatrix& matrix,
                                          double sigma_obs) {
  const double kappa = sigma_obs * std::numbers::sqrt2;
  std::vector<double> grad(matrix.size(), 0.0);
  for (size_t i = 0; i < matrix.size(); ++i) {
    for (size_t j = i + 1; j < matrix.size(); ++j) {
      const double cij = matrix.count(i, j);
      const double cji = matrix.count(j, i);
      if (cij == 0.0 && cji == 0.0) continue;
      const double d = (scores[i] - scores[j]) / kappa;
      double g = 0.0;
      if (cij != 0.0) g += cij * InverseMillsRatio(d);
      if (cji != 0.0) g -= cji * InverseMillsRatio(-d);
      g /= kappa;
      grad[i] += g;
      grad[j] -= g;
    }
  }
  return grad;
}

std::vector<double> MatchScores(const JodScale& predicted,
                                const JodScale& reference) {
  if (predicted.item_ids.size() != reference.item_ids.size()) {
    throw DataError("score sets differ in size (" +
                    std::to_string(predicted.item_ids.size()) + " vs " +
                    std::to_string(reference.item_ids.size()) + ")");
  }
  std::unordered_map<std::string, size_t> ref_index;
  for (size_t k = 0; k < reference.item_ids.size(); ++k) {
    ref_index.emplace(reference.item_ids[k], k);
  }
  std::vector<double> out;
  out.reserve(predicted.item_ids.size());
  for (const std::string& id : predicted.item_ids) {
    auto it = ref_index.find(id);
    if (it == ref_index.end()) {
      throw DataError("item '" + id + "' missing from reference scores");
    }
    out.push_back(reference.scores[it->second]);
  }
  return out;
}

double LogLikelihood(const JodScale& scores, const ComparisonMatrix& matrix,
                     double sigma_obs) {
  JodScale as_matrix{matrix.item_ids(), {}, {}};
  return LogLikelihood(MatchScores(as_matrix, scores), matrix, sigma_obs);
}

ComparisonMatrix AddPseudocounts(const ComparisonMatrix& matrix,
                                 double pseudocount) {
  ComparisonMatrix out = matrix;
  if (pseudocount == 0.0) return out;
  for (size_t i = 0; i < matrix.size(); ++i) {
    for (size_t j = i + 1; j < matrix.size(); ++j) {
      if (matrix.total(i, j) <= 0.0) continue;
      out.add_count(i, j, pseudocount);
      out.add_count(j, i, pseudocount);
    }
  }
  return out;
}

namespace {

double MaxAbs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double SquaredNorm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

JodScale ScaleMle(const ComparisonMatrix& matrix, const MleScalerConfig& config,
                  MleDiagnostics* diagnostics) {
  if (!(config.gradient_tolerance > 0.0)) {
    throw std::invalid_argument("ScaleMle: gradient_tolerance must be > 0");
  }
  const size_t n = matrix.size();
  JodScale result{matrix.item_ids(), std::vector<double>(n, 0.0), {}};
  if (n < 2) return result;
  const auto components = ConnectedComponents(matrix);
  if (components.size() > 1) {
    throw DataError("comparison graph is disconnected (" +
                    std::to_string(components.size()) +
                    " components): " + DescribeComponents(matrix, components));
  }

  const ComparisonMatrix augmented =
      AddPseudocounts(matrix, config.prior_pseudocount);
  const double sigma = config.sigma_obs;

  // Curvature of the likelihood grows with the per-item comparison count,
  // so the first trial step is scaled by its inverse.
  double max_degree = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (j != i) degree += augmented.total(i, j);
    }
    max_degree = std::max(max_degree, degree);
  }
  double step = config.initial_step * 2.0 * sigma * sigma / max_degree;

  std::vector<double> s(n, 0.0);
  double f = LogLikelihood(s, augmented, sigma);
  std::vector<double> g = LogLikelihoodGradient(s, augmented, sigma);
  double g_norm = MaxAbs(g);
  size_t iter = 0;
  std::vector<double> trial(n);
  for (; iter < config.max_iterations && g_norm >= config.gradient_tolerance;
       ++iter) {
    const double g_sq = SquaredNorm(g);
    bool accepted = false;
    while (!accepted) {
      for (size_t i = 0; i < n; ++i) trial[i] = s[i] + step * g[i];
      CenterInPlace(trial);
      const double f_trial = LogLikelihood(trial, augmented, sigma);
      const double gain = config.armijo * step * g_sq;
      if (f_trial >= f + gain) {
        accepted = true;
      } else if (step * g_sq <
                 1e3 * std::numeric_limits<double>::epsilon() * (std::abs(f) + 1.0)) {
        // Objective differences are below rounding noise; fall back to
        // requiring a smaller gradient.
        const auto g_trial = LogLikelihoodGradient(trial, augmented, sigma);
        accepted = MaxAbs(g_trial) < g_norm;
      }
      if (accepted) {
        s = trial;
        f = f_trial;
        break;
      }
      step *= config.backtrack_factor;
      if (step < 1e-300) {
        throw DataError("MLE line search stalled; gradient norm " +
                        std::to_string(g_norm));
      }
    }
    g = LogLikelihoodGradient(s, augmented, sigma);
    g_norm = MaxAbs(g);
    step *= 1.5;
  }
  if (diagnostics != nullptr) {
    diagnostics->iterations = iter;
    diagnostics->gradient_norm = g_norm;
  }
  if (g_norm >= config.gradient_tolerance) {
    std::ostringstream os;
    os << "MLE scaler did not converge within " << config.max_iterations
       << " iterations; final gradient norm " << g_norm;
    throw DataError(os.str());
  }
  result.scores = std::move(s);
  return result;
}

JodScale AlignScores(const JodScale& predicted, const JodScale& reference) {
  const std::vector<double> ref = MatchScores(predicted, reference);
  const double ref_mean =
      ref.empty() ? 0.0
                  : std::accumulate(ref.begin(), ref.end(), 0.0) /
                        static_cast<double>(ref.size());
  const double shift = ref_mean - predicted.Mean();
  JodScale out = predicted;
  for (double& x : out.scores) x += shift;
  return out;
}

}  // namespace pairscale
