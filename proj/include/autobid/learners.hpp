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

// Strategy-update rules for bidders.
//
//  * naive: gradient ascent on the bidder's smoothed Monte Carlo utility
//    with the announced mechanism and opponents frozen.
//  * lola:  ascent on the first-order expansion of the utility after the
//    seller and the opponents each take one predicted naive step of size
//    lookahead_rate.
//  * pg:    pseudo-gradient search. For K' random perturbations of norm d
//    the bidder clones the seller, replays T revenue-ascent steps against
//    bids drawn from the perturbed strategy (the inner loop), and scores the
//    perturbation by the utility gain per unit step under the retrained
//    mechanism. The strategy moves along the best positive perturbation.

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "autobid/bidders.hpp"
#include "autobid/common.hpp"
#include "autobid/diffcore.hpp"
#include "autobid/mechanisms.hpp"
#include "autobid/values.hpp"

namespace autobid {

enum class LearnerKind { kStatic, kNaive, kLola, kPg };

inline std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::kStatic: return "static";
    case LearnerKind::kNaive: return "naive";
    case LearnerKind::kLola: return "lola";
    case LearnerKind::kPg: return "pg";
  }
  return "?";
}

struct LearnerConfig {
  LearnerKind kind = LearnerKind::kStatic;
  double learning_rate = 1.0;         // eta
  double lookahead_rate = 1.0;        // eta', the seller step size assumed by lola / pg
  std::size_t inner_steps = 100;      // T
  std::size_t directions = 8;         // K'
  std::size_t direction_memory = 3;   // s
  double similarity_bound = 0.0;      // l
  double step_bound = 0.05;           // d
  double discount = 0.99;             // lambda; recorded, pg works in the lambda -> 1 limit
  std::size_t batch = 2048;           // Monte Carlo batch for gradients and evaluation
  std::size_t inner_batch = 512;      // bids per simulated seller step
  std::size_t inner_pool = 0;         // >0: cycle through this many fixed inner batches
  double tau = 0.1;                   // soft-min / soft-max temperature on gradient paths
  double kappa = 50.0;                // allocation softmax sharpness on gradient paths
  double fd_step = 1e-4;              // lola finite-difference perturbation
  std::uint64_t seed = 0;

  void validate(const std::string& field = "learner") const {
    if (kind == LearnerKind::kStatic) return;
    if (!(learning_rate > 0.0)) throw ConfigError(field + ".learning_rate must be > 0");
    if (!(lookahead_rate >= 0.0)) throw ConfigError(field + ".lookahead_rate must be >= 0");
    if (inner_steps < 1) throw ConfigError(field + ".inner_steps must be >= 1");
    if (directions < 1) throw ConfigError(field + ".directions must be >= 1");
    if (!(step_bound > 0.0)) throw ConfigError(field + ".step_bound must be > 0");
    if (!(discount > 0.0 && discount <= 1.0))
      throw ConfigError(field + ".discount must be in (0, 1]");
    if (batch < 1) throw ConfigError(field + ".batch must be >= 1");
    if (inner_batch < 1) throw ConfigError(field + ".inner_batch must be >= 1");
    if (!(tau > 0.0)) throw ConfigError(field + ".tau must be > 0");
    if (!(kappa > 0.0)) throw ConfigError(field + ".kappa must be > 0");
    if (!(fd_step > 0.0)) throw ConfigError(field + ".fd_step must be > 0");
  }

  bool operator==(const LearnerConfig&) const = default;
};

// Everything a bidder observes when it updates in round t: the strategies
// played in round t, the announced mechanism, and the value distributions.
struct MarketView {
  std::span<const Strategy> strategies;
  const Seller& seller;
  std::span<const UniformSpec> values;
  bool expose_opponent_params = true;
};

// ---------------------------------------------------------------------------
// Evaluation helpers.

inline Matrix hard_bids(std::span<const Strategy> strategies, const Matrix& values) {
  Matrix bids(values.rows, values.cols);
  for (std::size_t r = 0; r < values.rows; ++r)
    for (std::size_t i = 0; i < values.cols; ++i) bids(r, i) = strategies[i].bid(values(r, i));
  return bids;
}

struct BatchResult {
  std::vector<double> utility;  // per bidder, mean over rows
  std::vector<double> payment;  // per bidder, mean over rows
  double revenue = 0.0;
};

// Realised (hard) outcomes averaged over the rows of `values`.
inline BatchResult evaluate_hard(std::span<const Strategy> strategies, const Seller& seller,
                                 const Matrix& values) {
  const std::size_t n = values.cols;
  BatchResult r;
  r.utility.assign(n, 0.0);
  r.payment.assign(n, 0.0);
  std::vector<double> bids(n);
  for (std::size_t s = 0; s < values.rows; ++s) {
    for (std::size_t i = 0; i < n; ++i) bids[i] = strategies[i].bid(values(s, i));
    const Outcome o = seller.run(bids);
    for (std::size_t i = 0; i < n; ++i) {
      r.utility[i] += o.allocation[i] * values(s, i) - o.payments[i];
      r.payment[i] += o.payments[i];
    }
  }
  const double inv = values.rows > 0 ? 1.0 / static_cast<double>(values.rows) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.utility[i] *= inv;
    r.payment[i] *= inv;
    r.revenue += r.payment[i];
  }
  return r;
}

struct SoftBatch {
  std::vector<Var> utility;
  Var revenue;
};

// Smoothed outcomes on the tape. `theta` holds one Var per flat mechanism
// parameter; `leaves[i]` is either empty (bidder i held constant) or one Var
// per parameter of strategies[i].
inline SoftBatch evaluate_soft(Tape& t, const Seller& seller, std::span<const Var> theta,
                               std::span<const Strategy> strategies,
                               std::span<const std::vector<Var>> leaves, const Matrix& values,
                               double kappa, double tau) {
  const std::size_t n = values.cols;
  std::vector<std::vector<Var>> utility_terms(n, std::vector<Var>(values.rows));
  std::vector<Var> revenue_terms(values.rows);
  std::vector<Var> bids(n);
  for (std::size_t s = 0; s < values.rows; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = values(s, i);
      bids[i] = leaves[i].empty() ? Tape::constant(strategies[i].bid(v, BidMode::smooth(tau)))
                                  : strategies[i].bid(t, leaves[i], v, tau);
    }
    SoftOutcome o;
    if (seller.first_price()) {
      o.allocation = soft_argmax(t, bids, kappa);
      o.payments = bids;
    } else {
      o = soft_virtual_auction(t, seller.params(), theta, bids, kappa, tau);
    }
    for (std::size_t i = 0; i < n; ++i) {
      // a_i (v_i - p_i)
      const Var a = o.allocation[i], p = o.payments[i];
      const double v = values(s, i);
      utility_terms[i][s] = a.is_constant() && p.is_constant()
                                ? Tape::constant(a.value * (v - p.value))
                                : t.push(a.value * (v - p.value), "utility",
                                         {{a, v - p.value}, {p, -a.value}});
    }
    revenue_terms[s] = dot(t, o.allocation, o.payments);
  }
  SoftBatch out;
  for (std::size_t i = 0; i < n; ++i) out.utility.push_back(mean(t, utility_terms[i]));
  out.revenue = mean(t, revenue_terms);
  return out;
}

inline std::vector<Var> constant_vars(std::span<const double> xs) {
  std::vector<Var> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = Tape::constant(xs[i]);
  return out;
}

// Gradients of soft quantities with respect to one block of inputs.
struct SoftGradients {
  std::vector<double> d_utility_self;   // d U_self / d block
  std::vector<double> d_utility_owner;  // d U_owner / d block (owner = block's bidder)
  std::vector<double> d_revenue;        // d R / d block
};

// Block = strategy parameters of bidder `owner` (owner >= 0) or the
// mechanism parameters (owner < 0).
inline SoftGradients soft_gradients(const MarketView& view,
                                    std::span<const Strategy> strategies, int owner,
                                    std::size_t self, const Matrix& values, double kappa,
                                    double tau, Tape& t) {
  t.clear();
  const std::vector<double> flat = view.seller.params().flat();
  const std::size_t n = strategies.size();
  std::vector<std::vector<Var>> leaves(n);
  std::vector<Var> theta;
  std::span<const double> block;
  if (owner < 0) {
    theta = parameter_leaves(t, flat);
    block = flat;
  } else {
    const auto& p = strategies[owner].params().values();
    leaves[owner] = parameter_leaves(t, p);
    theta = constant_vars(flat);
    block = p;
  }
  const std::vector<Var>& block_vars = owner < 0 ? theta : leaves[owner];
  SoftBatch sb = evaluate_soft(t, view.seller, theta, strategies, leaves, values, kappa, tau);
  auto extract = [&](Var out) {
    std::vector<double> adj;
    t.backward(out, adj);
    std::vector<double> g(block.size(), 0.0);
    if (!out.is_constant())
      for (std::size_t k = 0; k < block.size(); ++k)
        if (!block_vars[k].is_constant()) g[k] = adj[block_vars[k].id];
    if (!all_finite(g)) throw NumericError("non-finite utility gradient");
    return g;
  };
  SoftGradients g;
  g.d_utility_self = extract(sb.utility[self]);
  if (owner >= 0) g.d_utility_owner = extract(sb.utility[owner]);
  g.d_revenue = extract(sb.revenue);
  return g;
}

inline std::vector<double> clip_norm(std::vector<double> step, double bound) {
  const double norm = l2_norm(step);
  if (norm > bound)
    for (double& x : step) x *= bound / norm;
  return step;
}

// Shading factors stay nonnegative so bids never go below zero.
inline Strategy apply_step(const Strategy& s, std::span<const double> step) {
  std::vector<double> p(s.params().values().begin(), s.params().values().end());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] += step[k];
  if (s.kind() == StrategyKind::kLinear) p[0] = std::max(p[0], 0.0);
  if (!all_finite(p)) throw NumericError("strategy update produced non-finite parameters");
  return s.with_params(p);
}

inline void require_learnable(const Strategy& s) {
  if (!s.learnable()) throw ConfigError("strategy kind '" + to_string(s.kind()) +
                                        "' has no parameters to learn");
}

// ---------------------------------------------------------------------------
// Naive learner.

// d U_i / d pi_i of the smoothed utility.
inline std::vector<double> utility_gradient(std::size_t i, const MarketView& view,
                                            std::span<const Strategy> strategies,
                                            const Matrix& values, const LearnerConfig& cfg,
                                            Tape& t) {
  return soft_gradients(view, strategies, static_cast<int>(i), i, values, cfg.kappa, cfg.tau, t)
      .d_utility_self;
}

inline Strategy naive_step(std::size_t i, const MarketView& view, const LearnerConfig& cfg,
                           Rng& rng, Tape& t) {
  const Strategy& current = view.strategies[i];
  require_learnable(current);
  if (cfg.learning_rate == 0.0) return current;
  const Matrix values = sample_values(view.values, cfg.batch, rng);
  std::vector<double> g = utility_gradient(i, view, view.strategies, values, cfg, t);
  for (double& x : g) x *= cfg.learning_rate;
  return apply_step(current, clip_norm(std::move(g), cfg.step_bound));
}

// ---------------------------------------------------------------------------
// LOLA.

// Shaping term h(pi_i) = eta' [ grad_theta R . grad_theta U_i
//                              + sum_j grad_{pi_j} U_j . grad_{pi_j} U_i ],
// the first-order change of U_i when the seller and every visible learning
// opponent take one naive step of size eta'.
inline double lola_shaping(std::size_t i, const MarketView& view,
                           std::span<const Strategy> strategies, const Matrix& values,
                           const LearnerConfig& cfg, Tape& t) {
  double h = 0.0;
  if (view.seller.learns()) {
    SoftGradients g = soft_gradients(view, strategies, -1, i, values, cfg.kappa, cfg.tau, t);
    h += dot(g.d_revenue, g.d_utility_self);
  }
  if (view.expose_opponent_params) {
    for (std::size_t j = 0; j < strategies.size(); ++j) {
      if (j == i || !strategies[j].learnable()) continue;
      SoftGradients g = soft_gradients(view, strategies, static_cast<int>(j), i, values,
                                       cfg.kappa, cfg.tau, t);
      h += dot(g.d_utility_owner, g.d_utility_self);
    }
  }
  return cfg.lookahead_rate * h;
}

inline Strategy lola_step(std::size_t i, const MarketView& view, const LearnerConfig& cfg,
                          Rng& rng, Tape& t) {
  const Strategy& current = view.strategies[i];
  require_learnable(current);
  const Matrix values = sample_values(view.values, cfg.batch, rng);
  std::vector<double> g = utility_gradient(i, view, view.strategies, values, cfg, t);
  if (cfg.lookahead_rate > 0.0) {
    std::vector<Strategy> probe(view.strategies.begin(), view.strategies.end());
    std::vector<double> p(current.params().values().begin(), current.params().values().end());
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double saved = p[k];
      p[k] = saved + cfg.fd_step;
      probe[i] = current.with_params(p);
      const double up = lola_shaping(i, view, probe, values, cfg, t);
      p[k] = saved - cfg.fd_step;
      probe[i] = current.with_params(p);
      const double down = lola_shaping(i, view, probe, values, cfg, t);
      p[k] = saved;
      g[k] += (up - down) / (2.0 * cfg.fd_step);
    }
  }
  for (double& x : g) x *= cfg.learning_rate;
  return apply_step(current, clip_norm(std::move(g), cfg.step_bound));
}

// ---------------------------------------------------------------------------
// Pseudo-gradient learner.

class DirectionHistory {
 public:
  explicit DirectionHistory(std::size_t capacity) : capacity_(capacity) {}

  void push(std::vector<double> d) {
    if (capacity_ == 0) return;
    entries_.push_back(std::move(d));
    while (entries_.size() > capacity_) entries_.pop_front();
  }
  const std::deque<std::vector<double>>& entries() const { return entries_; }
  std::size_t capacity() const { return capacity_; }
  void clear() { entries_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<std::vector<double>> entries_;
};

// Uniform direction on the sphere of radius d whose inner product with every
// remembered direction is below `bound`; rejection sampling, 1000 attempts.
inline std::vector<double> sample_direction(const DirectionHistory& history, std::size_t dim,
                                            double d, double bound, Rng& rng) {
  if (dim == 0) throw ConfigError("cannot perturb a strategy without parameters");
  std::vector<double> x(dim);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double norm = 0.0;
    while (norm == 0.0) {
      for (double& v : x) v = rng.normal();
      norm = l2_norm(x);
    }
    for (double& v : x) v *= d / norm;
    bool ok = true;
    for (const auto& h : history.entries())
      if (!(dot(x, h) < bound)) {
        ok = false;
        break;
      }
    if (ok) return x;
  }
  throw ConfigError("no perturbation satisfied the similarity bound after 1000 attempts; "
                    "increase similarity_bound or reduce direction_memory");
}

// Seller parameters after T simulated revenue-ascent steps against bids from
// (candidate, opponents). Only the clone changes.
inline Seller inner_loop(std::size_t i, const Strategy& candidate, const MarketView& view,
                         std::size_t steps, double lookahead_rate, std::size_t batch,
                         std::uint64_t stream_seed, Tape& t, std::size_t pool_size = 0) {
  SellerConfig cfg = view.seller.config();
  cfg.learning_rate = lookahead_rate;
  Seller clone(cfg, view.seller.params().bidders(), 0);
  clone.set_params(view.seller.params());
  clone.set_iterations(view.seller.iterations());
  std::vector<Strategy> strategies(view.strategies.begin(), view.strategies.end());
  strategies[i] = candidate;
  if (cfg.kind == SellerKind::kAnalyticMyerson) {
    // The analytic seller jumps straight to its fixed point.
    std::vector<std::optional<UniformSpec>> reported(strategies.size());
    for (std::size_t j = 0; j < strategies.size(); ++j)
      reported[j] = reported_distribution(strategies[j], view.values[j]);
    clone.fit_reported(reported);
    return clone;
  }
  if (!clone.learns()) return clone;
  Rng rng(stream_seed);
  std::vector<Matrix> pool;
  for (std::size_t k = 0; k < steps; ++k) {
    Matrix values;
    if (pool_size > 0) {
      if (pool.size() < pool_size) pool.push_back(sample_values(view.values, batch, rng));
      values = pool[k % pool_size];
    } else {
      values = sample_values(view.values, batch, rng);
    }
    try {
      clone.update(hard_bids(strategies, values), t);
    } catch (const NumericError& e) {
      throw NumericError("inner loop iteration " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  return clone;
}

struct PseudoGradient {
  double value = 0.0;
  double candidate_utility = 0.0;
};

// (U_i(pi + delta, theta_hat) - U_i(pi, theta)) / |delta| on a common batch.
inline PseudoGradient pseudo_gradient(std::size_t i, std::span<const double> delta,
                                      const MarketView& view, const LearnerConfig& cfg,
                                      const Matrix& eval_values, double baseline_utility,
                                      std::uint64_t inner_seed, Tape& t) {
  const Strategy& current = view.strategies[i];
  const Strategy candidate = apply_step(current, delta);
  const Seller retrained = inner_loop(i, candidate, view, cfg.inner_steps, cfg.lookahead_rate,
                                      cfg.inner_batch, inner_seed, t, cfg.inner_pool);
  std::vector<Strategy> strategies(view.strategies.begin(), view.strategies.end());
  strategies[i] = candidate;
  const double u = evaluate_hard(strategies, retrained, eval_values).utility[i];
  return {(u - baseline_utility) / l2_norm(delta), u};
}

struct PgReport {
  std::vector<std::vector<double>> directions;
  std::vector<double> pseudo_gradients;
  int chosen = -1;
};

inline Strategy pg_step(std::size_t i, const MarketView& view, const LearnerConfig& cfg,
                        Rng& rng, Tape& t, PgReport* report = nullptr) {
  const Strategy& current = view.strategies[i];
  require_learnable(current);
  const std::size_t dim = current.dim();
  const Matrix eval_values = sample_values(view.values, cfg.batch, rng);
  const std::uint64_t inner_seed = rng.engine()();
  const double baseline = evaluate_hard(view.strategies, view.seller, eval_values).utility[i];

  DirectionHistory history(cfg.direction_memory);
  PgReport local;
  PgReport& rep = report ? *report : local;
  rep = {};
  for (std::size_t j = 0; j < cfg.directions; ++j) {
    std::vector<double> delta =
        sample_direction(history, dim, cfg.step_bound, cfg.similarity_bound, rng);
    history.push(delta);
    const PseudoGradient pg =
        pseudo_gradient(i, delta, view, cfg, eval_values, baseline, inner_seed, t);
    rep.directions.push_back(std::move(delta));
    rep.pseudo_gradients.push_back(pg.value);
  }
  double best = 0.0;
  for (std::size_t j = 0; j < rep.pseudo_gradients.size(); ++j)
    if (rep.pseudo_gradients[j] > best) {
      best = rep.pseudo_gradients[j];
      rep.chosen = static_cast<int>(j);
    }
  if (rep.chosen < 0) return current;
  // pi + eta * delta*, where delta* is the winning perturbation itself.
  std::vector<double> step = rep.directions[rep.chosen];
  for (double& x : step) x *= cfg.learning_rate;
  return apply_step(current, step);
}

// Dispatch on the learner kind.
inline Strategy learner_step(std::size_t i, const MarketView& view, const LearnerConfig& cfg,
                             Rng& rng, Tape& t) {
  switch (cfg.kind) {
    case LearnerKind::kStatic: return view.strategies[i];
    case LearnerKind::kNaive: return naive_step(i, view, cfg, rng, t);
    case LearnerKind::kLola: return lola_step(i, view, cfg, rng, t);
    case LearnerKind::kPg: return pg_step(i, view, cfg, rng, t);
  }
  return view.strategies[i];
}

}  // namespace autobid
