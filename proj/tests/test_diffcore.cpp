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

#include "autobid/diffcore.hpp"
#include "oracles.hpp"

using namespace autobid;

namespace {

// Exercises every primitive once.
Var composite(Tape& t, std::span<const Var> p) {
  Var a = add(t, p[0], p[1]);
  Var b = mul(t, a, p[2]);
  Var c = sub(t, b, scale(t, p[3], 0.7));
  Var d = shift(t, exp(t, scale(t, c, 0.3)), -1.0);
  Var e = softplus(t, d);
  Var f = exp_affine(t, p[4], e, p[5]);
  std::vector<Var> xs{f, p[0], p[3]};
  std::vector<Var> sm = softmax(t, xs, 1.5);
  Var g = dot(t, sm, xs);
  std::vector<Var> ws{p[1], p[2]};
  std::vector<Var> ins{g, e};
  Var h = affine(t, ws, ins, p[5]);
  std::vector<Var> all{h, g, f};
  return add(t, mean(t, all), sum(t, std::vector<Var>{min2(p[0], p[1]), max2(p[2], p[3])}));
}

double composite_value(const std::vector<double>& x) {
  Tape t;
  auto leaves = parameter_leaves(t, x);
  return composite(t, leaves).value;
}

}  // namespace

TEST(Tape, GradientOfEveryPrimitiveMatchesFiniteDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> x(6);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    Tape t;
    const auto vg = value_and_gradient(x, composite, t);
    EXPECT_DOUBLE_EQ(vg.value, composite_value(x));
    const auto fd = oracle::finite_difference(composite_value, x);
    EXPECT_LT(oracle::max_rel_err(vg.gradient, fd), 1e-4) << "trial " << trial;
  }
}

TEST(Tape, ConstantsAreFoldedWithoutNodes) {
  Tape t;
  Var a = Tape::constant(2.0), b = Tape::constant(3.0);
  Var c = softplus(t, exp(t, mul(t, add(t, a, b), sub(t, b, a))));
  EXPECT_TRUE(c.is_constant());
  EXPECT_EQ(t.size(), 0u);
  EXPECT_DOUBLE_EQ(c.value, softplus(std::exp(5.0)));
}

TEST(Tape, NonFiniteValueRaisesNumericError) {
  Tape t;
  Var x = t.variable(800.0);
  EXPECT_THROW(exp(t, x), NumericError);
}

TEST(Tape, ReusedTapeGivesIdenticalGradients) {
  Tape t;
  const std::vector<double> x{0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
  const auto a = value_and_gradient(x, composite, t);
  const auto b = value_and_gradient(x, composite, t);
  EXPECT_EQ(a.gradient, b.gradient);
  EXPECT_EQ(a.value, b.value);
}

TEST(Tape, MovedTapeKeepsNodes) {
  Tape t;
  Var x = t.variable(2.0);
  Var y = mul(t, x, x);
  Tape u = std::move(t);
  EXPECT_DOUBLE_EQ(u.backward(y)[x.id], 4.0);
}

TEST(ParamVector, SegmentsAreContiguousAndNamed) {
  ParamVector p;
  p.add_segment("a", {2, 3}, 1.0);
  p.add_segment("b", {4}, 2.0);
  EXPECT_EQ(p.size(), 10u);
  EXPECT_EQ(p.info("b").offset, 6u);
  EXPECT_EQ(p.segment("a").size(), 6u);
  EXPECT_DOUBLE_EQ(p.segment("b")[3], 2.0);
  EXPECT_THROW(p.add_segment("a", {1}), ConfigError);
  EXPECT_THROW(p.segment("missing"), ConfigError);
  ParamVector z = p.zeros_like();
  EXPECT_TRUE(z.same_layout(p));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  p.values()[0] = NAN;
  EXPECT_THROW(p.check_finite(), NumericError);
}

// Hand-rolled network used as the reference for mlp_forward.
TEST(Mlp, ForwardMatchesHandComputation) {
  const std::size_t widths[] = {2, 3, 1};
  ParamVector p = make_mlp(widths);
  Rng rng(3);
  for (double& v : p.values()) v = rng.normal();
  const double x[] = {0.4, -1.2};
  auto w0 = p.segment("layer0.weight");
  auto b0 = p.segment("layer0.bias");
  auto w1 = p.segment("layer1.weight");
  auto b1 = p.segment("layer1.bias");
  double out = b1[0];
  for (int h = 0; h < 3; ++h) {
    const double z = w0[h * 2] * x[0] + w0[h * 2 + 1] * x[1] + b0[h];
    out += w1[h] * std::log(1.0 + std::exp(z));
  }
  EXPECT_NEAR(mlp_forward(p, x)[0], out, 1e-12);

  Tape t;
  auto leaves = parameter_leaves(t, p.values());
  std::vector<Var> xin{Tape::constant(x[0]), Tape::constant(x[1])};
  EXPECT_NEAR(mlp_forward(t, p, leaves, xin)[0].value, out, 1e-12);
}

TEST(Mlp, ParameterGradientMatchesFiniteDifferences) {
  const std::size_t widths[] = {1, 4, 4, 1};
  ParamVector p = make_mlp(widths);
  Rng rng(5);
  for (double& v : p.values()) v = rng.normal(0.0, 0.5);
  auto loss = [&](Tape& t, std::span<const Var> leaves) {
    std::vector<Var> outs;
    for (double x : {-0.5, 0.2, 0.9}) {
      std::vector<Var> in{Tape::constant(x)};
      outs.push_back(mlp_forward(t, p, leaves, in)[0]);
    }
    return mean(t, outs);
  };
  Tape t;
  std::vector<double> x0(p.values().begin(), p.values().end());
  const auto vg = value_and_gradient(x0, loss, t);
  const auto fd = oracle::finite_difference(
      [&](const std::vector<double>& x) {
        ParamVector q = p;
        std::copy(x.begin(), x.end(), q.values().begin());
        double s = 0.0;
        for (double v : {-0.5, 0.2, 0.9}) s += mlp_forward(q, std::vector<double>{v})[0];
        return s / 3.0;
      },
      x0);
  EXPECT_LT(oracle::max_rel_err(vg.gradient, fd), 1e-4);
}

TEST(Mlp, WidthMismatchIsAConfigError) {
  const std::size_t widths[] = {2, 1};
  ParamVector p = make_mlp(widths);
  EXPECT_THROW(mlp_forward(p, std::vector<double>{1.0}), ConfigError);
  EXPECT_THROW(make_mlp(std::span<const std::size_t>(widths, 1)), ConfigError);
}

TEST(Mlp, SingleLinearUnitAndZeroWeights) {
  const std::size_t widths[] = {1, 1};
  ParamVector p = make_mlp(widths);
  p.segment("layer0.weight")[0] = 2.0;
  p.segment("layer0.bias")[0] = -1.0;
  EXPECT_DOUBLE_EQ(mlp_forward(p, std::vector<double>{0.5})[0], 0.0);

  const std::size_t deep[] = {2, 3, 1};
  ParamVector z = make_mlp(deep);
  for (double& v : z.values()) v = 0.0;
  z.segment("layer1.bias")[0] = -0.75;
  for (double x : {-3.0, 0.0, 2.5}) EXPECT_DOUBLE_EQ(mlp_forward(z, std::vector<double>{x, x})[0], -0.75);
}

TEST(Tape, SquareAndConstantLosses) {
  Tape t;
  const auto sq = value_and_gradient(std::vector<double>{3.0},
                                     [](Tape& tp, std::span<const Var> p) { return mul(tp, p[0], p[0]); }, t);
  EXPECT_DOUBLE_EQ(sq.value, 9.0);
  EXPECT_DOUBLE_EQ(sq.gradient[0], 6.0);
  const auto c = value_and_gradient(std::vector<double>{1.0, -2.0, 0.5},
                                    [](Tape&, std::span<const Var>) { return Tape::constant(4.2); }, t);
  EXPECT_DOUBLE_EQ(c.value, 4.2);
  for (double g : c.gradient) EXPECT_EQ(g, 0.0);
}

TEST(Tape, EvaluationIsBitDeterministic) {
  Rng rng(17);
  std::vector<double> x(6);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  Tape a, b;
  const auto ga = value_and_gradient(x, composite, a);
  const auto gb = value_and_gradient(x, composite, b);
  EXPECT_EQ(ga.value, gb.value);
  EXPECT_EQ(ga.gradient, gb.gradient);
}
