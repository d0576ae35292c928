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
#include <numeric>

#include <gtest/gtest.h>

#include "pairscale/error.h"
#include "pairscale/metrics.h"
#include "pairscale/observer.h"
#include "pairscale/random.h"
#include "test_support.h"

namespace pairscale {
namespace {

using ::pairscale::testing::BoostNormalCdf;
using ::pairscale::testing::BoostNormalQuantile;
using ::pairscale::testing::GridSearchThreeItems;
using ::pairscale::testing::MakeIds;
using ::pairscale::testing::RandomMatrix;
using ::pairscale::testing::RandomScores;
using ::pairscale::testing::ReferenceLogLikelihood;

MleScalerConfig NoPrior() {
  MleScalerConfig c;
  c.prior_pseudocount = 0.0;
  return c;
}

double Sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

// Reference two-player update written from the published formulas.
void ReferenceUpdate(double& mu_w, double& sigma_w, double& mu_l,
                     double& sigma_l, double beta) {
  const double c2 = 2 * beta * beta + sigma_w * sigma_w + sigma_l * sigma_l;
  const double c = std::sqrt(c2);
  const double t = (mu_w - mu_l) / c;
  const double pdf = std::exp(-t * t / 2) / std::sqrt(2 * M_PI);
  const double v = pdf / BoostNormalCdf(t);
  const double w = v * (v + t);
  const double vw = sigma_w * sigma_w, vl = sigma_l * sigma_l;
  mu_w += vw / c * v;
  mu_l -= vl / c * v;
  sigma_w = std::sqrt(vw * (1 - vw / c2 * w));
  sigma_l = std::sqrt(vl * (1 - vl / c2 * w));
}

TEST(TrueSkillTest, FirstUpdateMatchesKnownValues) {
  const auto next = TrueSkillUpdate(TrueSkillState::Initial(2), 0, 1);
  EXPECT_NEAR(next.mu[0], 29.2052, 1e-4);
  EXPECT_NEAR(next.mu[1], 20.7948, 1e-4);
  EXPECT_NEAR(next.sigma[0], 7.1944, 1e-4);
  EXPECT_NEAR(next.sigma[1], 7.1944, 1e-4);
}

TEST(TrueSkillTest, SequenceMatchesReferenceUpdate) {
  Rng rng(5);
  TrueSkillState state = TrueSkillState::Initial(4);
  std::vector<double> mu = state.mu, sigma = state.sigma;
  for (int k = 0; k < 200; ++k) {
    const size_t a = rng.UniformInt(4);
    size_t b = rng.UniformInt(3);
    if (b >= a) ++b;
    state = TrueSkillUpdate(state, a, b);
    ReferenceUpdate(mu[a], sigma[a], mu[b], sigma[b], state.beta);
    for (size_t i = 0; i < 4; ++i) {
      ASSERT_NEAR(state.mu[i], mu[i], 1e-9);
      ASSERT_NEAR(state.sigma[i], sigma[i], 1e-9);
    }
  }
}

TEST(TrueSkillTest, FractionalOutcomeInterpolates) {
  TrueSkillState base = TrueSkillState::Initial(2);
  base.mu[0] = 27;
  TrueSkillState half = base, win = base, lose = base;
  ApplyTrueSkillOutcome(half, 0, 1, 0.5);
  ApplyTrueSkillOutcome(win, 0, 1, 1.0);
  ApplyTrueSkillOutcome(lose, 0, 1, 0.0);
  EXPECT_NEAR(half.mu[0], 0.5 * (win.mu[0] + lose.mu[0]), 1e-12);
  EXPECT_NEAR(half.sigma[1] * half.sigma[1],
              0.5 * (win.sigma[1] * win.sigma[1] + lose.sigma[1] * lose.sigma[1]),
              1e-12);
  EXPECT_THROW(TrueSkillUpdate(base, 1, 1), std::invalid_argument);
}

TEST(TrueSkillTest, DominantItemScoresHigher) {
  ComparisonMatrix m({"a", "b"});
  m.set_count(0, 1, 6);
  const auto fit = ScaleTrueSkill(m, TrueSkillState::Initial(2), 1, 0);
  EXPECT_GT(fit.scale.scores[0], fit.scale.scores[1]);
  EXPECT_NEAR(Sum(fit.scale.scores), 0.0, 1e-12);
  EXPECT_TRUE(fit.warnings.empty());
}

TEST(TrueSkillTest, RelabelingPermutesScores) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const size_t n = 7;
    const auto m = RandomMatrix(n, 0.8, 6, true, seed);
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    Rng rng(seed + 100);
    rng.Shuffle(std::span<size_t>(perm));
    std::vector<std::string> ids(n);
    for (size_t k = 0; k < n; ++k) ids[k] = m.item_ids()[perm[k]];
    ComparisonMatrix pm(ids);
    for (size_t a = 0; a < n; ++a) {
      for (size_t b = 0; b < n; ++b) pm.set_count(a, b, m.count(perm[a], perm[b]));
    }
    const auto fit = ScaleTrueSkill(m, TrueSkillState::Initial(n), 2, seed);
    const auto pfit = ScaleTrueSkill(pm, TrueSkillState::Initial(n), 2, seed);
    for (size_t k = 0; k < n; ++k) {
      EXPECT_EQ(pfit.scale.scores[k], fit.scale.scores[perm[k]]);
      EXPECT_EQ(pfit.scale.item_ids[k], fit.scale.item_ids[perm[k]]);
    }
  }
}

TEST(TrueSkillTest, DisconnectedGraphScaledPerComponent) {
  ComparisonMatrix m(MakeIds(5));
  m.set_count(0, 1, 3);
  m.set_count(2, 3, 1);
  m.set_count(3, 4, 2);
  const auto fit = ScaleTrueSkill(m, TrueSkillState::Initial(5), 1, 0);
  ASSERT_EQ(fit.components.size(), 2u);
  ASSERT_EQ(fit.warnings.size(), 1u);
  EXPECT_NE(fit.warnings[0].find("{item00,item01}"), std::string::npos);
  EXPECT_NEAR(fit.scale.scores[0] + fit.scale.scores[1], 0.0, 1e-12);
  EXPECT_NEAR(fit.scale.scores[2] + fit.scale.scores[3] + fit.scale.scores[4], 0.0,
              1e-12);
}

TEST(TrueSkillTest, EmptyMatrixIsDataError) {
  EXPECT_THROW(ScaleTrueSkill(ComparisonMatrix(MakeIds(3)), TrueSkillState::Initial(3), 1, 0),
               DataError);
}

TEST(TrueSkillTest, FractionalCountsAccepted) {
  ComparisonMatrix m({"a", "b", "c"});
  m.set_count(0, 1, 22.5);
  m.set_count(1, 0, 7.5);
  m.set_count(1, 2, 0.3);
  m.set_count(2, 1, 0.2);
  const auto fit = ScaleTrueSkill(m, TrueSkillState::Initial(3), 1, 1);
  EXPECT_GT(fit.scale.scores[0], fit.scale.scores[1]);
  for (double s : fit.scale.scores) EXPECT_TRUE(std::isfinite(s));
}

TEST(TrueSkillTest, JodMapCalibratedAgainstMle) {
  // On dense matrices the MLE scale is nearly unbiased; the TrueSkill
  // conversion should reproduce its slope.
  std::vector<double> slopes;
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const size_t n = 15;
    const auto truth = RandomScores(n, 1.0, seed);
    const Design d = MakeDesign(DesignKind::kFull, n, 0, 1000, 0);
    const auto m = SimulateMatrix(MakeIds(n), truth, d, {kDefaultSigmaObs, seed}).matrix;
    const auto ts = ScaleTrueSkill(m, TrueSkillState::Initial(n), 1, seed).scale.scores;
    const auto mle = ScaleMle(m, {}).scores;
    double num = 0, den = 0;
    for (size_t k = 0; k < n; ++k) {
      num += ts[k] * mle[k];
      den += ts[k] * ts[k];
    }
    slopes.push_back(num / den);
  }
  std::sort(slopes.begin(), slopes.end());
  const double median = slopes[(slopes.size() - 1) / 2];
  EXPECT_NEAR(median, 1.0, 0.02);
}

TEST(TrueSkillTest, RecoversSyntheticRanking) {
  std::vector<double> srcc;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto truth = RandomScores(15, 1.0, seed);
    const Design d = MakeDesign(DesignKind::kFull, 15, 0, 30, 0);
    const auto m = SimulateMatrix(MakeIds(15), truth, d, {kDefaultSigmaObs, seed}).matrix;
    const auto fit = ScaleTrueSkill(m, TrueSkillState::Initial(15), 1, seed);
    srcc.push_back(*Srcc(fit.scale.scores, truth));
  }
  std::sort(srcc.begin(), srcc.end());
  EXPECT_GE(srcc[(srcc.size() - 1) / 2], 0.9);
}

TEST(LogLikelihoodTest, Fixtures) {
  EXPECT_EQ(LogLikelihood(std::vector<double>{0, 0, 0}, ComparisonMatrix(MakeIds(3)),
                          kDefaultSigmaObs),
            0.0);
  ComparisonMatrix m({"a", "b"});
  m.set_count(0, 1, 1);
  m.set_count(1, 0, 1);
  EXPECT_NEAR(LogLikelihood(std::vector<double>{0.4, 0.4}, m, kDefaultSigmaObs),
              2 * std::log(0.5), 1e-15);
}

TEST(LogLikelihoodTest, MatchesReferenceAndById) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = RandomMatrix(6, 0.7, 8, true, seed);
    const auto s = RandomScores(6, 1.5, seed + 1);
    EXPECT_NEAR(LogLikelihood(s, m, kDefaultSigmaObs),
                ReferenceLogLikelihood(s, m, kDefaultSigmaObs), 1e-9);
    JodScale reversed{{}, {}, {}};
    for (size_t k = 6; k-- > 0;) {
      reversed.item_ids.push_back(m.item_ids()[k]);
      reversed.scores.push_back(s[k]);
    }
    EXPECT_NEAR(LogLikelihood(reversed, m), LogLikelihood(s, m, kDefaultSigmaObs),
                1e-12);
  }
  JodScale wrong{{"x"}, {0.0}, {}};
  EXPECT_THROW(LogLikelihood(wrong, RandomMatrix(2, 1, 2, false, 0)), DataError);
}

TEST(LogLikelihoodTest, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = RandomMatrix(5, 0.8, 8, true, seed);
    auto s = RandomScores(5, 1.0, seed + 3);
    const auto g = LogLikelihoodGradient(s, m, kDefaultSigmaObs);
    for (size_t k = 0; k < 5; ++k) {
      const double h = 1e-6, orig = s[k];
      s[k] = orig + h;
      const double up = LogLikelihood(s, m, kDefaultSigmaObs);
      s[k] = orig - h;
      const double down = LogLikelihood(s, m, kDefaultSigmaObs);
      s[k] = orig;
      EXPECT_NEAR(g[k], (up - down) / (2 * h), 1e-6 * std::max(1.0, std::abs(g[k])));
    }
  }
}

TEST(MleTest, TwoItemClosedForm) {
  ComparisonMatrix m({"a", "b"});
  m.set_count(0, 1, 3);
  m.set_count(1, 0, 1);
  const JodScale s = ScaleMle(m, NoPrior());
  const double expected =
      std::sqrt(2.0) * kDefaultSigmaObs * BoostNormalQuantile(0.75);
  EXPECT_NEAR(expected, 1.0, 1e-14);
  EXPECT_NEAR(s.scores[0] - s.scores[1], expected, 1e-6);
  EXPECT_NEAR(s.scores[0] + s.scores[1], 0.0, 1e-12);
}

TEST(MleTest, BalancedMatrixGivesZeros) {
  ComparisonMatrix m(MakeIds(5));
  for (size_t i = 0; i < 5; ++i) {
    for (size_t j = i + 1; j < 5; ++j) {
      m.set_count(i, j, 1 + (i + j) % 4);
      m.set_count(j, i, 1 + (i + j) % 4);
    }
  }
  for (double s : ScaleMle(m, NoPrior()).scores) EXPECT_NEAR(s, 0.0, 1e-9);
}

TEST(MleTest, MatchesGridSearchOnThreeItems) {
  int checked = 0;
  for (uint64_t seed = 0; checked < 5; ++seed) {
    ASSERT_LT(seed, 100u);
    Rng rng(seed);
    ComparisonMatrix m(MakeIds(3));
    for (size_t i = 0; i < 3; ++i) {
      for (size_t j = 0; j < 3; ++j) {
        if (i != j) m.set_count(i, j, 1.0 + static_cast<double>(rng.UniformInt(10)));
      }
    }
    const auto grid = GridSearchThreeItems(m, 0.01, 3.0, kDefaultSigmaObs);
    const auto mle = ScaleMle(m, NoPrior()).scores;
    for (size_t k = 0; k < 3; ++k) EXPECT_NEAR(mle[k], grid[k], 0.02) << seed;
    ++checked;
  }
}

TEST(MleTest, LikelihoodNotBeatenByPerturbations) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = RandomMatrix(6, 0.9, 9, false, seed);
    if (ConnectedComponents(m).size() != 1) continue;
    const auto s = ScaleMle(m, NoPrior()).scores;
    const double best = LogLikelihood(s, m, kDefaultSigmaObs);
    Rng rng(seed);
    for (int trial = 0; trial < 50; ++trial) {
      auto p = s;
      const double scale = trial < 25 ? 1e-3 : 0.3;
      for (double& x : p) x += scale * rng.Normal();
      EXPECT_GE(best, LogLikelihood(p, m, kDefaultSigmaObs) - 1e-9);
    }
  }
}

TEST(MleTest, PriorKeepsUnanimousPairsFinite) {
  ComparisonMatrix m({"a", "b", "c"});
  m.set_count(0, 1, 5);
  m.set_count(1, 2, 5);
  const JodScale s = ScaleMle(m, {});
  for (double x : s.scores) EXPECT_TRUE(std::isfinite(x));
  EXPECT_GT(s.scores[0], s.scores[1]);
  EXPECT_GT(s.scores[1], s.scores[2]);
}

TEST(MleTest, DisconnectedGraphNamesComponents) {
  ComparisonMatrix m({"a", "b", "c", "d"});
  m.set_count(0, 1, 1);
  m.set_count(2, 3, 1);
  try {
    ScaleMle(m, {});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("{a,b}"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("{c,d}"), std::string::npos);
  }
}

TEST(MleTest, ReportsDiagnostics) {
  const auto m = RandomMatrix(8, 1.0, 6, false, 1);
  MleDiagnostics diag;
  ScaleMle(m, {}, &diag);
  EXPECT_GT(diag.iterations, 0u);
  EXPECT_LE(diag.gradient_norm, 1e-8);
}

TEST(AlignTest, Fixtures) {
  const JodScale ref{{"a", "b", "c"}, {0, 1, 2}, {}};
  const JodScale same = AlignScores(ref, ref);
  EXPECT_EQ(same.scores, ref.scores);
  const JodScale shifted{{"c", "a", "b"}, {5, 3, 4}, {}};
  const JodScale aligned = AlignScores(shifted, ref);
  EXPECT_EQ(aligned.scores, (std::vector<double>{2, 0, 1}));
  EXPECT_THROW(AlignScores(JodScale{{"a"}, {0}, {}}, ref), DataError);
}

TEST(PseudocountTest, OnlyObservedPairs) {
  ComparisonMatrix m(MakeIds(3));
  m.set_count(0, 1, 2);
  const auto p = AddPseudocounts(m, 0.5);
  EXPECT_EQ(p.count(0, 1), 2.5);
  EXPECT_EQ(p.count(1, 0), 0.5);
  EXPECT_EQ(p.total(1, 2), 0.0);
}

}  // namespace
}  // namespace pairscale
