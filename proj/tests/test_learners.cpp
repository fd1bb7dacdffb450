// Copyright 2026 The autobid Authors.
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

#include <gtest/gtest.h>

#include <cmath>

#include "autobid/analysis.hpp"
#include "autobid/arena.hpp"
#include "autobid/learners.hpp"
#include "oracles.hpp"

using namespace autobid;

namespace {

const std::vector<UniformSpec> kUnit(2);

Seller myerson_net(std::uint64_t seed, std::size_t n = 2) {
  SellerConfig c;
  c.learning_rate = 0.3;
  return Seller(c, n, seed);
}

Seller second_price(std::size_t n = 2) {
  SellerConfig c;
  c.kind = SellerKind::kSecondPrice;
  return Seller(c, n, 0);
}

double soft_utility(std::span<const Strategy> s, const Seller& seller, const Matrix& values,
                    std::size_t i, double kappa, double tau) {
  Tape t;
  const auto theta = constant_vars(seller.params().flat());
  std::vector<std::vector<Var>> leaves(s.size());
  return evaluate_soft(t, seller, theta, s, leaves, values, kappa, tau).utility[i].value;
}

Matrix unit_values(std::size_t rows, std::uint64_t seed, std::size_t n = 2) {
  Rng rng(seed);
  return sample_values(std::vector<UniformSpec>(n), rows, rng);
}

Seller fitted_for(std::span<const Strategy> s) {
  return analytic_seller(reported_distributions(s, kUnit));
}

LearnerConfig pg_config() {
  LearnerConfig c;
  c.kind = LearnerKind::kPg;
  c.directions = 2;
  c.direction_memory = 1;
  c.inner_steps = 3;
  c.inner_batch = 64;
  c.batch = 512;
  c.lookahead_rate = 0.3;
  return c;
}

}  // namespace

TEST(SoftUtility, StrategyGradientMatchesFiniteDifferences) {
  const Seller seller = myerson_net(3);
  const Matrix values = unit_values(64, 1);
  for (const Strategy& me : {Strategy::linear(0.7), Strategy::affine(0.5, 0.1), bidnet_init({10}, 4)}) {
    std::vector<Strategy> s{me, Strategy::truthful()};
    const MarketView view{s, seller, kUnit};
    LearnerConfig cfg;
    cfg.kappa = 20.0;
    cfg.tau = 0.2;
    Tape t;
    const auto g = utility_gradient(0, view, s, values, cfg, t);
    const std::vector<double> x(me.params().values().begin(), me.params().values().end());
    const auto fd = oracle::finite_difference(
        [&](const std::vector<double>& y) {
          std::vector<Strategy> p{me.with_params(y), Strategy::truthful()};
          return soft_utility(p, seller, values, 0, 20.0, 0.2);
        },
        x);
    EXPECT_LT(oracle::max_rel_err(g, fd), 1e-4) << to_string(me.kind());
  }
}

TEST(SoftUtility, MechanismGradientMatchesFiniteDifferences) {
  const Seller seller = myerson_net(5);
  const Matrix values = unit_values(32, 2);
  std::vector<Strategy> s{Strategy::linear(0.8), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  Tape t;
  const SoftGradients g = soft_gradients(view, s, -1, 0, values, 20.0, 0.2, t);
  const auto fd = oracle::finite_difference(
      [&](const std::vector<double>& x) {
        Seller q = seller;
        MechanismParams m = q.params();
        m.set_flat(x);
        q.set_params(m);
        return soft_utility(s, q, values, 0, 20.0, 0.2);
      },
      seller.params().flat());
  EXPECT_LT(oracle::max_rel_err(g.d_utility_self, fd), 1e-4);
}

TEST(SoftUtility, SharpLimitMatchesHardEvaluation) {
  const std::vector<Strategy> s{Strategy::linear(0.6), Strategy::truthful()};
  SellerConfig c;
  c.kind = SellerKind::kAnalyticMyerson;
  const Seller seller(c, 2, 0);
  const Matrix values = unit_values(4000, 3);
  const BatchResult hard = evaluate_hard(s, seller, values);
  EXPECT_NEAR(soft_utility(s, seller, values, 0, 1e4, 1e-4), hard.utility[0], 2e-3);
}

TEST(Naive, MovesTowardTruthfulUnderSecondPrice) {
  const Seller seller = second_price();
  std::vector<Strategy> s{Strategy::linear(0.6), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kNaive;
  Rng rng(1);
  Tape t;
  const Strategy next = naive_step(0, view, cfg, rng, t);
  EXPECT_GT(next.summary(), 0.6);
  EXPECT_LE(next.summary() - 0.6, cfg.step_bound + 1e-12);
}

TEST(Naive, StepNormIsClipped) {
  const Seller seller = myerson_net(2);
  std::vector<Strategy> s{bidnet_init({10}, 1), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kNaive;
  cfg.learning_rate = 100.0;
  cfg.step_bound = 0.01;
  Rng rng(2);
  Tape t;
  const Strategy next = naive_step(0, view, cfg, rng, t);
  std::vector<double> diff(next.dim());
  for (std::size_t k = 0; k < diff.size(); ++k)
    diff[k] = next.params().values()[k] - s[0].params().values()[k];
  EXPECT_NEAR(l2_norm(diff), 0.01, 1e-12);
}

TEST(Naive, TruthfulStrategyCannotLearn) {
  const Seller seller = second_price();
  std::vector<Strategy> s{Strategy::truthful(), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kNaive;
  Rng rng(1);
  Tape t;
  EXPECT_THROW(naive_step(0, view, cfg, rng, t), ConfigError);
}

TEST(Lola, ShapingIsTheFirstOrderChangeAfterASellerStep) {
  const Seller seller = myerson_net(7);
  const Matrix values = unit_values(64, 4);
  std::vector<Strategy> s{Strategy::linear(0.7), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kLola;
  cfg.kappa = 20.0;
  cfg.tau = 0.2;
  cfg.lookahead_rate = 1e-4;
  Tape t;
  const double h = lola_shaping(0, view, s, values, cfg, t);
  const SoftGradients g = soft_gradients(view, s, -1, 0, values, 20.0, 0.2, t);
  std::vector<double> theta = seller.params().flat();
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += cfg.lookahead_rate * g.d_revenue[k];
  Seller moved = seller;
  MechanismParams m = moved.params();
  m.set_flat(theta);
  moved.set_params(m);
  const double change = soft_utility(s, moved, values, 0, 20.0, 0.2) - soft_utility(s, seller, values, 0, 20.0, 0.2);
  EXPECT_NEAR(h, change, 1e-3 * std::abs(change) + 1e-12);
}

TEST(Lola, OpponentTermIsIncludedOnlyWhenVisible) {
  SellerConfig c;
  c.kind = SellerKind::kSecondPrice;
  const Seller seller(c, 2, 0);
  const Matrix values = unit_values(64, 5);
  std::vector<Strategy> s{Strategy::linear(0.7), Strategy::linear(0.5)};
  LearnerConfig cfg;
  cfg.kappa = 20.0;
  cfg.tau = 0.2;
  Tape t;
  const MarketView visible{s, seller, kUnit, true};
  const MarketView hidden{s, seller, kUnit, false};
  EXPECT_NE(lola_shaping(0, visible, s, values, cfg, t), 0.0);
  EXPECT_EQ(lola_shaping(0, hidden, s, values, cfg, t), 0.0);
}

TEST(Lola, ZeroLookaheadReducesToNaive) {
  const Seller seller = myerson_net(9);
  std::vector<Strategy> s{Strategy::linear(0.7), Strategy::linear(0.8)};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg;
  cfg.batch = 256;
  cfg.lookahead_rate = 0.0;
  Rng r1(3), r2(3);
  Tape t;
  EXPECT_EQ(lola_step(0, view, cfg, r1, t).params(), naive_step(0, view, cfg, r2, t).params());
}

TEST(Directions, HaveTheRequestedNormAndRespectTheBound) {
  Rng rng(1);
  DirectionHistory h(3);
  for (int k = 0; k < 50; ++k) {
    const auto d = sample_direction(h, 31, 0.3, 0.0, rng);
    EXPECT_NEAR(l2_norm(d), 0.3, 1e-12);
    for (const auto& old : h.entries()) EXPECT_LT(dot(d, old), 0.0);
    h.push(d);
    EXPECT_LE(h.entries().size(), 3u);
  }
}

TEST(Directions, OneDimensionalMemoryOneAlternatesSign) {
  Rng rng(2);
  DirectionHistory h(1);
  const auto a = sample_direction(h, 1, 0.05, 0.0, rng);
  h.push(a);
  const auto b = sample_direction(h, 1, 0.05, 0.0, rng);
  EXPECT_DOUBLE_EQ(std::abs(a[0]), 0.05);
  EXPECT_DOUBLE_EQ(b[0], -a[0]);
  h.push(b);
  // Remembering both signs leaves no admissible direction.
  DirectionHistory full(2);
  full.push(a);
  full.push(b);
  EXPECT_THROW(sample_direction(full, 1, 0.05, 0.0, rng), ConfigError);
}

TEST(InnerLoop, TrainsACloneAndLeavesTheSellerUntouched) {
  const Seller seller = myerson_net(11);
  const MechanismParams before = seller.params();
  std::vector<Strategy> s{Strategy::linear(0.5), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  Tape t;
  const Seller a = inner_loop(0, Strategy::linear(0.45), view, 5, 0.3, 64, 77, t);
  const Seller b = inner_loop(0, Strategy::linear(0.45), view, 5, 0.3, 64, 77, t);
  EXPECT_EQ(seller.params(), before);
  EXPECT_EQ(a.params(), b.params());
  EXPECT_NE(a.params(), before);
  EXPECT_EQ(a.iterations(), seller.iterations() + 5);
  EXPECT_EQ(a.config().learning_rate, 0.3);
  const Seller pooled = inner_loop(0, Strategy::linear(0.45), view, 5, 0.3, 64, 77, t, 1);
  EXPECT_NE(pooled.params(), a.params());
}

TEST(InnerLoop, AnalyticSellerRefitsToTheCandidate) {
  SellerConfig c;
  c.kind = SellerKind::kAnalyticMyerson;
  const Seller seller(c, 2, 0);
  std::vector<Strategy> s{Strategy::truthful(), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  Tape t;
  const Seller fitted = inner_loop(0, Strategy::linear(0.5), view, 1, 1.0, 8, 1, t);
  EXPECT_NEAR(fitted.params().nets[0](0.25), 0.0, 1e-12);  // 2b - 0.5
  EXPECT_NEAR(fitted.params().nets[1](0.5), 0.0, 1e-12);   // 2b - 1
}

TEST(InnerLoop, StaticSellerIsReturnedUnchanged) {
  const Seller seller = second_price();
  std::vector<Strategy> s{Strategy::linear(0.5), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  Tape t;
  EXPECT_EQ(inner_loop(0, Strategy::linear(0.4), view, 10, 1.0, 8, 1, t).params(), seller.params());
}

TEST(PseudoGradient, IsTheUtilityDifferencePerUnitStep) {
  const Seller seller = second_price();
  std::vector<Strategy> s{Strategy::linear(0.6), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  const LearnerConfig cfg = pg_config();
  const Matrix values = unit_values(2000, 6);
  const double base = evaluate_hard(s, seller, values).utility[0];
  Tape t;
  const std::vector<double> delta{0.1};
  const PseudoGradient pg = pseudo_gradient(0, delta, view, cfg, values, base, 1, t);
  std::vector<Strategy> moved{Strategy::linear(0.7), Strategy::truthful()};
  const double u = evaluate_hard(moved, seller, values).utility[0];
  EXPECT_NEAR(pg.candidate_utility, u, 1e-12);
  EXPECT_NEAR(pg.value, (u - base) / 0.1, 1e-9);
}

TEST(Pg, TakesTheLiteralStepAlongTheBestDirection) {
  const Seller seller = second_price();
  std::vector<Strategy> s{Strategy::linear(0.6), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg = pg_config();
  cfg.learning_rate = 0.5;
  Rng rng(4);
  Tape t;
  PgReport rep;
  const Strategy next = pg_step(0, view, cfg, rng, t, &rep);
  ASSERT_EQ(rep.directions.size(), 2u);
  ASSERT_GE(rep.chosen, 0);
  const std::size_t c = static_cast<std::size_t>(rep.chosen);
  for (double g : rep.pseudo_gradients) EXPECT_LE(g, rep.pseudo_gradients[c]);
  EXPECT_GT(rep.directions[c][0], 0.0);  // shading less pays under second price
  EXPECT_NEAR(next.summary(), 0.6 + 0.5 * rep.directions[c][0], 1e-12);
}

TEST(Pg, NoImprovingDirectionMeansNoUpdate) {
  // Truthful bidding is optimal under second price: every perturbation of
  // alpha = 1 loses utility on a common batch.
  const Seller seller = second_price();
  std::vector<Strategy> s{Strategy::linear(1.0), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg = pg_config();
  cfg.batch = 20000;
  Rng rng(5);
  Tape t;
  PgReport rep;
  const Strategy next = pg_step(0, view, cfg, rng, t, &rep);
  EXPECT_EQ(rep.chosen, -1);
  EXPECT_EQ(next.params(), s[0].params());
}

TEST(Pg, IsDeterministicGivenTheRng) {
  const Seller seller = myerson_net(13);
  std::vector<Strategy> s{bidnet_init({10}, 2), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg = pg_config();
  cfg.directions = 3;
  cfg.direction_memory = 2;
  cfg.step_bound = 0.2;
  Rng r1(9), r2(9);
  Tape t;
  EXPECT_EQ(pg_step(0, view, cfg, r1, t).params(), pg_step(0, view, cfg, r2, t).params());
}

TEST(LearnerConfig, ValidationNamesTheField) {
  LearnerConfig c;
  c.kind = LearnerKind::kPg;
  c.step_bound = 0.0;
  try {
    c.validate("bidders[1].learner");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bidders[1].learner.step_bound"), std::string::npos);
  }
  c.kind = LearnerKind::kStatic;
  EXPECT_NO_THROW(c.validate());
}

TEST(LearnerStep, StaticKeepsTheStrategy) {
  const Seller seller = second_price();
  std::vector<Strategy> s{Strategy::linear(0.3), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg;
  Rng rng(1);
  Tape t;
  EXPECT_EQ(learner_step(0, view, cfg, rng, t).params(), s[0].params());
}

TEST(Naive, ZeroRateKeepsTheStrategy) {
  const Seller seller = myerson_net(1);
  std::vector<Strategy> s{Strategy::linear(0.4), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kNaive;
  cfg.learning_rate = 0.0;
  Rng rng(1);
  Tape t;
  EXPECT_EQ(naive_step(0, view, cfg, rng, t).params(), s[0].params());
}

TEST(Naive, ClimbsTowardTruthAgainstTheMechanismFittedToItsBids) {
  // The seller stays fitted to the distribution the learner currently
  // reports (g(b) = 2b - alpha); naive ascent still walks alpha up.
  std::vector<Strategy> s{Strategy::linear(0.5), Strategy::truthful()};
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kNaive;
  Rng rng(3);
  Tape t;
  for (int step = 0; step < 60; ++step) {
    const Seller seller = fitted_for(s);
    const MarketView view{s, seller, kUnit};
    s[0] = naive_step(0, view, cfg, rng, t);
  }
  EXPECT_GT(s[0].summary(), 0.85);
}

TEST(Naive, GradientSignBelowTruthAgreesWithFiniteDifferences) {
  std::vector<Strategy> s{Strategy::linear(0.95), Strategy::truthful()};
  const Seller seller = fitted_for(s);
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg;
  const Matrix values = unit_values(400000, 8);
  Tape t;
  const double g = utility_gradient(0, view, s, unit_values(20000, 9), cfg, t)[0];
  const double h = 0.02;
  auto u = [&](double a) {
    std::vector<Strategy> m{Strategy::linear(a), Strategy::truthful()};
    return evaluate_hard(m, seller, values).utility[0];
  };
  const double fd = (u(0.95 + h) - u(0.95 - h)) / (2.0 * h);
  EXPECT_GT(g, 0.0);
  EXPECT_GT(fd, 0.0);
}

TEST(Naive, LeavesShadingMonotonicallyAgainstAnAdaptedMechanism) {
  std::vector<Strategy> s{Strategy::linear(0.6), Strategy::truthful()};
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kNaive;
  Rng rng(4);
  Tape t;
  std::vector<double> window_means;
  double acc = 0.0;
  for (int step = 1; step <= 50; ++step) {
    const Seller seller = fitted_for(s);
    const MarketView view{s, seller, kUnit};
    s[0] = naive_step(0, view, cfg, rng, t);
    acc += s[0].summary();
    if (step % 10 == 0) {
      window_means.push_back(acc / 10.0);
      acc = 0.0;
    }
  }
  for (std::size_t k = 1; k < window_means.size(); ++k) EXPECT_GT(window_means[k], window_means[k - 1]) << k;
}

TEST(InnerLoop, CloneReplaysTheSellersOwnTrajectory) {
  const Seller seller = myerson_net(21);
  std::vector<Strategy> s{Strategy::linear(0.7), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  Tape t;
  const Seller clone = inner_loop(0, s[0], view, 6, seller.config().learning_rate, 128, 55, t);
  Seller live = seller;
  Rng rng(55);
  for (int k = 0; k < 6; ++k) live.update(hard_bids(s, sample_values(kUnit, 128, rng)), t);
  EXPECT_EQ(clone.params(), live.params());
  EXPECT_EQ(clone.iterations(), live.iterations());
}

TEST(InnerLoop, ZeroLookaheadLeavesOutcomesUnchanged) {
  const Seller seller = myerson_net(22);
  std::vector<Strategy> s{Strategy::linear(0.7), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  Tape t;
  const Seller clone = inner_loop(0, Strategy::linear(0.5), view, 20, 0.0, 64, 3, t);
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    const std::vector<double> b{rng.uniform(), rng.uniform()};
    const Outcome a = clone.run(b), o = seller.run(b);
    ASSERT_EQ(a.allocation, o.allocation);
    ASSERT_EQ(a.payments, o.payments);
  }
}

TEST(InnerLoop, LearnsTheShadedVirtualValue) {
  // Candidate alpha = 0.5 reports U[0, 0.5]; the optimal virtual value for
  // it is 2b - 0.5.
  SellerConfig c;
  const Seller seller(c, 2, 23);
  std::vector<Strategy> s{Strategy::truthful(), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  Tape t;
  const Seller clone = inner_loop(0, Strategy::linear(0.5), view, 200, c.learning_rate, 512, 8, t);
  double mae = 0.0;
  for (int k = 0; k <= 500; ++k) {
    const double b = 0.5 * k / 500.0;
    mae += std::fabs(clone.params().nets[0](b) - (2.0 * b - 0.5));
  }
  EXPECT_LT(mae / 501.0, 0.1);
}

TEST(Directions, FreeAndConstrainedSamples) {
  Rng rng(6);
  DirectionHistory none(0);
  for (int k = 0; k < 20; ++k) EXPECT_NEAR(l2_norm(sample_direction(none, 7, 0.05, 0.0, rng)), 0.05, 1e-12);
  DirectionHistory one(1);
  one.push(std::vector<double>{0.05});
  EXPECT_DOUBLE_EQ(sample_direction(one, 1, 0.05, 0.0, rng)[0], -0.05);
  DirectionHistory h(3);
  for (int k = 0; k < 3; ++k) h.push(sample_direction(h, 5, 1.0, 0.0, rng));
  for (int k = 0; k < 20; ++k) {
    const auto d = sample_direction(h, 5, 1.0, 0.0, rng);
    for (const auto& old : h.entries()) EXPECT_LE(dot(d, old), 0.0);
  }
}

TEST(PseudoGradient, ZeroWhenTheCandidateDoesNoBetter) {
  const Seller seller = second_price();
  std::vector<Strategy> s{Strategy::linear(0.6), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  const LearnerConfig cfg = pg_config();
  const Matrix values = unit_values(500, 7);
  Tape t;
  const std::vector<double> delta{0.1};
  const double u = pseudo_gradient(0, delta, view, cfg, values, 0.0, 1, t).candidate_utility;
  EXPECT_EQ(pseudo_gradient(0, delta, view, cfg, values, u, 1, t).value, 0.0);
}

TEST(PseudoGradient, ShadingFromTruthPaysOnceTheSellerAdapts) {
  std::vector<Strategy> s{Strategy::linear(1.0), Strategy::truthful()};
  const Seller seller = fitted_for(s);
  const MarketView view{s, seller, kUnit};
  const LearnerConfig cfg = pg_config();
  const Matrix values = unit_values(400000, 10);
  const double base = evaluate_hard(s, seller, values).utility[0];
  Tape t;
  const double down = pseudo_gradient(0, std::vector<double>{-0.1}, view, cfg, values, base, 1, t).value;
  const double up = pseudo_gradient(0, std::vector<double>{0.1}, view, cfg, values, base, 1, t).value;
  EXPECT_GT(down, 0.0);
  EXPECT_LT(up, 0.0);
  // Reference values from the exact induced-game utilities.
  const double ref_down = (oracle::induced_u1_exact(0.9, 1.0) - 1.0 / 12.0) / 0.1;
  const double ref_up = (oracle::induced_u1_exact(1.1, 1.0) - 1.0 / 12.0) / 0.1;
  EXPECT_NEAR(down, ref_down, 0.01);
  EXPECT_NEAR(up, ref_up, 0.01);
}

TEST(Pg, NoProfitableDeviationAtTheEquilibriumShading) {
  const double a = 5.0 / 14.0;
  std::vector<Strategy> s{Strategy::linear(a), Strategy::linear(a)};
  const Seller seller = fitted_for(s);
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg = pg_config();
  cfg.directions = 40;
  cfg.direction_memory = 0;
  cfg.step_bound = 0.05;
  cfg.batch = 400000;
  Rng rng(11);
  Tape t;
  PgReport rep;
  pg_step(0, view, cfg, rng, t, &rep);
  double best = -1.0;
  for (double g : rep.pseudo_gradients) best = std::max(best, g);
  EXPECT_LT(best, 0.02);
}

TEST(Pg, DisplacementIsTheScaledPerturbation) {
  const Seller seller = myerson_net(12);
  std::vector<Strategy> s{bidnet_init({10}, 3), Strategy::truthful()};
  const MarketView view{s, seller, kUnit};
  LearnerConfig cfg = pg_config();
  cfg.directions = 4;
  cfg.direction_memory = 3;
  cfg.step_bound = 0.2;
  cfg.learning_rate = 0.7;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Rng rng(seed);
    Tape t;
    PgReport rep;
    const Strategy next = pg_step(0, view, cfg, rng, t, &rep);
    for (const auto& d : rep.directions) EXPECT_NEAR(l2_norm(d), 0.2, 1e-12);
    std::vector<double> diff(next.dim());
    for (std::size_t k = 0; k < diff.size(); ++k)
      diff[k] = next.params().values()[k] - s[0].params().values()[k];
    EXPECT_NEAR(l2_norm(diff), rep.chosen < 0 ? 0.0 : 0.7 * 0.2, 1e-12);
  }
}
