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

// Ground truth: closed-form virtual values for uniform values, Monte Carlo
// estimators, and the induced game among linear shading bidders when the
// seller always best-responds to the reported bid distributions.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "autobid/bidders.hpp"
#include "autobid/common.hpp"
#include "autobid/mechanisms.hpp"
#include "autobid/values.hpp"

namespace autobid {

// g(v) = v - (1 - F(v)) / f(v) = 2v - hi on U[lo, hi].
inline double uniform_virtual_value(const UniformSpec& spec, double v) {
  if (!spec.contains(v)) throw InputError("value outside the distribution support");
  return 2.0 * v - spec.hi;
}

struct MonteCarloEstimate {
  std::vector<double> utility;
  std::vector<double> utility_se;
  double revenue = 0.0;
  double revenue_se = 0.0;
  std::size_t samples = 0;
};

// Mean and standard error of per-bidder utility and revenue.
inline MonteCarloEstimate mc_utility(std::span<const Strategy> strategies, const Seller& seller,
                                     std::span<const UniformSpec> specs, std::size_t samples,
                                     std::uint64_t seed) {
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (strategies.size() != specs.size()) throw ConfigError("one value spec per strategy");
  const std::size_t n = specs.size();
  Rng rng(seed);
  std::vector<double> sum(n, 0.0), sq(n, 0.0), values(n), bids(n);
  double rsum = 0.0, rsq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = specs[i].sample(rng);
      bids[i] = strategies[i].bid(values[i]);
    }
    const Outcome o = seller.run(bids);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = o.allocation[i] * values[i] - o.payments[i];
      sum[i] += u;
      sq[i] += u * u;
    }
    rsum += o.revenue;
    rsq += o.revenue * o.revenue;
  }
  const double m = static_cast<double>(samples);
  auto se = [m](double s1, double s2) {
    if (m < 2) return 0.0;
    const double mean = s1 / m;
    return std::sqrt(std::max(0.0, (s2 / m - mean * mean) * m / (m - 1.0)) / m);
  };
  MonteCarloEstimate est;
  est.samples = samples;
  for (std::size_t i = 0; i < n; ++i) {
    est.utility.push_back(sum[i] / m);
    est.utility_se.push_back(se(sum[i], sq[i]));
  }
  est.revenue = rsum / m;
  est.revenue_se = se(rsum, rsq);
  return est;
}

// Mechanism that is optimal for the given reported uniform bid distributions.
inline Seller analytic_seller(std::span<const std::optional<UniformSpec>> reported) {
  SellerConfig cfg;
  cfg.kind = SellerKind::kAnalyticMyerson;
  Seller seller(cfg, reported.size(), 0);
  seller.fit_reported(reported);
  return seller;
}

// ---------------------------------------------------------------------------
// Induced game between two linear shading bidders with U[0, 1] values. The
// seller prices reported U[0, a] with g(b) = 2b - a, so bidder 1 with value v1
// has virtual value a1 (2 v1 - 1) and, on winning, pays
// (max(0, a2 (2 v2 - 1)) + a1) / 2.
//
// Value pairs are drawn once (common random numbers for every cell) on a
// k x k jittered grid, k = round(sqrt(samples)), and each pair is used in
// both bidder roles. Near the equilibrium the utility surface is very flat,
// so plain sampling noise is enough to make grid best responses cycle; the
// stratification and the role swap cut that noise and make the estimate
// exactly symmetric, U2(x, y) == U1(y, x).

class InducedGameSampler {
 public:
  InducedGameSampler(std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw ConfigError("samples must be >= 1");
    const auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(samples)))));
    Rng rng(seed);
    v1_.reserve(k * k);
    v2_.reserve(k * k);
    const double cell = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        v1_.push_back((static_cast<double>(i) + rng.uniform()) * cell);
        v2_.push_back((static_cast<double>(j) + rng.uniform()) * cell);
      }
  }

  std::size_t samples() const { return v1_.size(); }

  // Utility of the bidder shading by `mine` against one shading by `theirs`.
  double utility(double mine, double theirs) const {
    if (!(mine > 0.0) || !(theirs > 0.0)) throw InputError("shading coefficients must be > 0");
    double u = 0.0;
    for (std::size_t s = 0; s < v1_.size(); ++s) {
      u += gain(mine, theirs, v1_[s], v2_[s]);
      u += gain(mine, theirs, v2_[s], v1_[s]);
    }
    return u / (2.0 * static_cast<double>(v1_.size()));
  }

  // (U1, U2) at shading (a1, a2).
  std::pair<double, double> utilities(double a1, double a2) const {
    return {utility(a1, a2), utility(a2, a1)};
  }

 private:
  // Bidder 1 wins ties.
  static double gain(double a1, double a2, double v1, double v2) {
    const double w1 = a1 * (2.0 * v1 - 1.0);
    const double w2 = a2 * (2.0 * v2 - 1.0);
    if (w1 > 0.0 && w1 >= w2) return v1 - (std::max(0.0, w2) + a1) * 0.5;
    return 0.0;
  }

  std::vector<double> v1_, v2_;
};

inline std::pair<double, double> induced_utility(double a1, double a2, std::size_t samples,
                                                 std::uint64_t seed) {
  return InducedGameSampler(samples, seed).utilities(a1, a2);
}

struct InducedGameGrid {
  std::vector<double> alphas;
  Matrix u1;  // u1(i, j) = U_1(alphas[i], alphas[j])
  Matrix u2;  // u2(i, j) = U_2(alphas[i], alphas[j])

  std::size_t size() const { return alphas.size(); }
  std::size_t nearest(double a) const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < alphas.size(); ++k)
      if (std::abs(alphas[k] - a) < std::abs(alphas[best] - a)) best = k;
    return best;
  }
};

inline std::vector<double> alpha_grid(double lo, double hi, double h) {
  if (!(h > 0.0) || !(hi >= lo) || !(lo > 0.0))
    throw ConfigError("grid needs 0 < lo <= hi and h > 0");
  std::vector<double> out;
  const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / h + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) out.push_back(lo + h * static_cast<double>(k));
  return out;
}

inline InducedGameGrid induced_game_grid(std::vector<double> alphas, std::size_t samples,
                                         std::uint64_t seed) {
  const InducedGameSampler sampler(samples, seed);
  InducedGameGrid g;
  g.alphas = std::move(alphas);
  const std::size_t m = g.alphas.size();
  g.u1 = Matrix(m, m);
  g.u2 = Matrix(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) g.u1(i, j) = sampler.utility(g.alphas[i], g.alphas[j]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) g.u2(i, j) = g.u1(j, i);
  return g;
}

struct BestResponseResult {
  std::size_t alpha1 = 0, alpha2 = 0;  // grid indices of the final state
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<std::pair<std::size_t, std::size_t>> cycle;  // set when a state repeats
};

// Simultaneous best responses on the grid; the lowest index wins ties.
inline BestResponseResult grid_best_response_dynamics(const InducedGameGrid& g, double start1,
                                                      double start2, std::size_t max_iters) {
  if (g.size() == 0) throw ConfigError("empty grid");
  BestResponseResult r;
  std::size_t a = g.nearest(start1), b = g.nearest(start2);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  std::vector<std::pair<std::size_t, std::size_t>> path;
  for (std::size_t it = 0; it < max_iters; ++it) {
    seen[{a, b}] = path.size();
    path.emplace_back(a, b);
    std::size_t na = 0, nb = 0;
    for (std::size_t k = 1; k < g.size(); ++k) {
      if (g.u1(k, b) > g.u1(na, b)) na = k;
      if (g.u2(a, k) > g.u2(a, nb)) nb = k;
    }
    r.iterations = it + 1;
    if (na == a && nb == b) {
      r.converged = true;
      break;
    }
    a = na;
    b = nb;
    if (auto f = seen.find({a, b}); f != seen.end()) {
      r.cycle.assign(path.begin() + static_cast<std::ptrdiff_t>(f->second), path.end());
      break;
    }
  }
  r.alpha1 = a;
  r.alpha2 = b;
  return r;
}

}  // namespace autobid
