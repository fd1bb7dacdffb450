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

// Seller side. A Myerson Net maps every bid through a monotone per-bidder
// virtual-value network
//
//     G(b) = max_j min_k ( e^{gamma_jk} b + beta_jk ),
//
// gives the item to the highest virtual value above the reserve r0 and
// charges the winner the smallest bid that would still have won:
// G_w^{-1}(max(r0, highest losing virtual value)). The inverse is exact:
// G^{-1}(w) = min_j max_k e^{-gamma_jk} (w - beta_jk).
//
// Training uses a smooth surrogate of revenue (soft_revenue) in which the
// allocation is a softmax over virtual values plus a reserve slot and the
// price threshold is a NeuralSort soft maximum.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "autobid/common.hpp"
#include "autobid/diffcore.hpp"
#include "autobid/softsort.hpp"
#include "autobid/values.hpp"

namespace autobid {

class VirtualValueNet {
 public:
  VirtualValueNet() : VirtualValueNet(1, 1) {}
  VirtualValueNet(std::size_t groups, std::size_t pieces)
      : groups_(groups), pieces_(pieces), log_slope_(groups * pieces, 0.0),
        intercept_(groups * pieces, 0.0), slope_(groups * pieces, 1.0),
        inv_slope_(groups * pieces, 1.0) {
    if (groups == 0 || pieces == 0) throw ConfigError("virtual-value net needs J, K >= 1");
  }

  // Single piece slope * b + intercept (slope > 0).
  static VirtualValueNet affine(double slope, double intercept) {
    if (!(slope > 0.0)) throw ConfigError("virtual-value slope must be positive");
    VirtualValueNet net(1, 1);
    net.set_piece(0, std::log(slope), intercept);
    return net;
  }
  static VirtualValueNet identity() { return affine(1.0, 0.0); }

  static VirtualValueNet random(std::size_t groups, std::size_t pieces, double stddev, Rng& rng) {
    VirtualValueNet net(groups, pieces);
    std::vector<double> g(net.size()), b(net.size());
    for (double& x : g) x = rng.normal(0.0, stddev);
    for (double& x : b) x = rng.normal(0.0, stddev);
    net.assign(g, b);
    return net;
  }

  std::size_t groups() const { return groups_; }
  std::size_t pieces() const { return pieces_; }
  std::size_t size() const { return log_slope_.size(); }
  std::span<const double> log_slope() const { return log_slope_; }
  std::span<const double> intercept() const { return intercept_; }

  void set_piece(std::size_t p, double log_slope, double intercept) {
    log_slope_[p] = log_slope;
    intercept_[p] = intercept;
    slope_[p] = std::exp(log_slope);
    inv_slope_[p] = std::exp(-log_slope);
  }
  void assign(std::span<const double> log_slopes, std::span<const double> intercepts) {
    if (log_slopes.size() != size() || intercepts.size() != size())
      throw ConfigError("virtual-value net parameter size mismatch");
    for (std::size_t p = 0; p < size(); ++p) set_piece(p, log_slopes[p], intercepts[p]);
  }

  double operator()(double b) const { return piece_value(active_piece(b), b); }
  double inverse(double w) const { return inverse_piece_value(active_inverse_piece(w), w); }

  double slope(std::size_t p) const { return slope_[p]; }
  double inverse_slope(std::size_t p) const { return inv_slope_[p]; }
  double piece_value(std::size_t p, double b) const { return slope_[p] * b + intercept_[p]; }
  double inverse_piece_value(std::size_t p, double w) const {
    return inv_slope_[p] * (w - intercept_[p]);
  }

  // Index (j * K + k) of the affine piece attaining max_j min_k at b.
  std::size_t active_piece(double b) const {
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < groups_; ++j) {
      std::size_t arg = j * pieces_;
      double lo = piece_value(arg, b);
      for (std::size_t k = 1; k < pieces_; ++k) {
        const double v = piece_value(j * pieces_ + k, b);
        if (v < lo) {
          lo = v;
          arg = j * pieces_ + k;
        }
      }
      if (lo > best_value) {
        best_value = lo;
        best = arg;
      }
    }
    return best;
  }

  // Index of the piece attaining min_j max_k of the inverse pieces at w.
  std::size_t active_inverse_piece(double w) const {
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < groups_; ++j) {
      std::size_t arg = j * pieces_;
      double hi = inverse_piece_value(arg, w);
      for (std::size_t k = 1; k < pieces_; ++k) {
        const double v = inverse_piece_value(j * pieces_ + k, w);
        if (v > hi) {
          hi = v;
          arg = j * pieces_ + k;
        }
      }
      if (hi < best_value) {
        best_value = hi;
        best = arg;
      }
    }
    return best;
  }

  bool operator==(const VirtualValueNet& o) const {
    return groups_ == o.groups_ && pieces_ == o.pieces_ && log_slope_ == o.log_slope_ &&
           intercept_ == o.intercept_;
  }

 private:
  std::size_t groups_;
  std::size_t pieces_;
  std::vector<double> log_slope_;
  std::vector<double> intercept_;
  std::vector<double> slope_;      // e^{log_slope}
  std::vector<double> inv_slope_;  // e^{-log_slope}
};

// Seller parameters: one virtual-value net per bidder plus the virtual-space
// reserve. Flat layout per bidder i: [log_slope (J*K), intercept (J*K)].
struct MechanismParams {
  std::vector<VirtualValueNet> nets;
  double reserve = 0.0;

  std::size_t bidders() const { return nets.size(); }

  static MechanismParams random(std::size_t bidders, std::size_t groups, std::size_t pieces,
                                double stddev, double reserve, Rng& rng) {
    MechanismParams m;
    m.reserve = reserve;
    for (std::size_t i = 0; i < bidders; ++i)
      m.nets.push_back(VirtualValueNet::random(groups, pieces, stddev, rng));
    return m;
  }
  static MechanismParams identity(std::size_t bidders, double reserve = 0.0) {
    return MechanismParams{std::vector<VirtualValueNet>(bidders, VirtualValueNet::identity()),
                           reserve};
  }
  // The optimal (Myerson) mechanism for U[lo_i, hi_i] bids: g_i(b) = 2b - hi_i.
  static MechanismParams uniform_myerson(std::span<const UniformSpec> specs) {
    MechanismParams m;
    for (const auto& s : specs) m.nets.push_back(VirtualValueNet::affine(2.0, -s.hi));
    return m;
  }

  std::size_t flat_size() const {
    std::size_t n = 0;
    for (const auto& net : nets) n += 2 * net.size();
    return n;
  }
  std::vector<double> flat() const {
    std::vector<double> out;
    out.reserve(flat_size());
    for (const auto& net : nets) {
      out.insert(out.end(), net.log_slope().begin(), net.log_slope().end());
      out.insert(out.end(), net.intercept().begin(), net.intercept().end());
    }
    return out;
  }
  void set_flat(std::span<const double> values) {
    if (values.size() != flat_size()) throw ConfigError("mechanism parameter size mismatch");
    std::size_t o = 0;
    for (auto& net : nets) {
      const std::size_t k = net.size();
      net.assign(values.subspan(o, k), values.subspan(o + k, k));
      o += 2 * k;
    }
  }
  // Offset of bidder i's block in the flat layout.
  std::size_t flat_offset(std::size_t bidder) const {
    std::size_t o = 0;
    for (std::size_t i = 0; i < bidder; ++i) o += 2 * nets[i].size();
    return o;
  }

  bool operator==(const MechanismParams&) const = default;
};

struct Outcome {
  std::vector<int> allocation;
  std::vector<double> payments;
  double revenue = 0.0;
  int winner = -1;
};

// Single-item auction in virtual-value space. `value(i, b)` and
// `inverse(i, w)` give bidder i's virtual value and its inverse; the winner
// is the lowest-index maximiser provided its virtual value exceeds the
// reserve, and pays the smallest bid in [0, b_w] that keeps it winning.
template <class ValueFn, class InverseFn>
Outcome run_virtual_auction(std::span<const double> bids, double reserve, ValueFn&& value,
                            InverseFn&& inverse) {
  const std::size_t n = bids.size();
  Outcome out;
  out.allocation.assign(n, 0);
  out.payments.assign(n, 0.0);
  if (n == 0) return out;
  double wbuf[16] = {};
  std::vector<double> wheap;
  double* w = wbuf;
  if (n > 16) {
    wheap.resize(n);
    w = wheap.data();
  }
  for (std::size_t i = 0; i < n; ++i) w[i] = value(i, bids[i]);
  const std::size_t best = hard_argmax(std::span<const double>(w, n));
  if (!(w[best] > reserve)) return out;
  double threshold = reserve;
  for (std::size_t j = 0; j < n; ++j)
    if (j != best) threshold = std::max(threshold, w[j]);
  const double price = std::clamp(inverse(best, threshold), 0.0, bids[best]);
  out.winner = static_cast<int>(best);
  out.allocation[best] = 1;
  out.payments[best] = price;
  out.revenue = price;
  return out;
}

inline Outcome run_auction(const MechanismParams& theta, std::span<const double> bids) {
  if (bids.size() != theta.bidders())
    throw ConfigError("bid profile has " + std::to_string(bids.size()) + " entries, mechanism has " +
                      std::to_string(theta.bidders()) + " bidders");
  return run_virtual_auction(
      bids, theta.reserve, [&](std::size_t i, double b) { return theta.nets[i](b); },
      [&](std::size_t i, double w) { return theta.nets[i].inverse(w); });
}

// Numerical inverse of a strictly increasing scalar map.
inline double invert_increasing(const std::function<double(double)>& q, double y) {
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 2000 && q(lo) > y; ++i) lo *= 2.0;
  for (int i = 0; i < 2000 && q(hi) < y; ++i) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (q(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Runs the mechanism with virtual values Q o G_i (reserve Q(r0)) and
// compares every outcome with the original one.
inline bool ic_invariance_check(const MechanismParams& theta,
                                const std::function<double(double)>& q,
                                const Matrix& bid_sample, double tolerance = 1e-9) {
  for (std::size_t r = 0; r < bid_sample.rows; ++r) {
    auto bids = bid_sample.row(r);
    const Outcome base = run_auction(theta, bids);
    const Outcome composed = run_virtual_auction(
        bids, q(theta.reserve), [&](std::size_t i, double b) { return q(theta.nets[i](b)); },
        [&](std::size_t i, double w) { return theta.nets[i].inverse(invert_increasing(q, w)); });
    if (base.allocation != composed.allocation) return false;
    for (std::size_t i = 0; i < bids.size(); ++i)
      if (std::abs(base.payments[i] - composed.payments[i]) > tolerance) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Differentiable surrogate.

// Virtual value of bidder i on the tape; `theta` holds one Var per flat
// mechanism parameter (leaves or constants).
inline Var virtual_value(Tape& t, const MechanismParams& m, std::span<const Var> theta,
                         std::size_t bidder, Var bid) {
  const VirtualValueNet& net = m.nets[bidder];
  const std::size_t base = m.flat_offset(bidder);
  const std::size_t p = net.active_piece(bid.value);
  const Var g = theta[base + p];
  const Var b = theta[base + net.size() + p];
  const double s = net.slope(p);
  const double v = s * bid.value + b.value;
  if (g.is_constant() && b.is_constant() && bid.is_constant()) return Tape::constant(v);
  return t.push(v, "vv", {{g, s * bid.value}, {bid, s}, {b, 1.0}});
}

inline Var virtual_value_inverse(Tape& t, const MechanismParams& m, std::span<const Var> theta,
                                 std::size_t bidder, Var w) {
  const VirtualValueNet& net = m.nets[bidder];
  const std::size_t base = m.flat_offset(bidder);
  const std::size_t p = net.active_inverse_piece(w.value);
  const Var g = theta[base + p];
  const Var b = theta[base + net.size() + p];
  const double s = net.inverse_slope(p);
  const double v = s * (w.value - b.value);
  if (g.is_constant() && b.is_constant() && w.is_constant()) return Tape::constant(v);
  return t.push(v, "vv_inverse", {{g, -v}, {w, s}, {b, -s}});
}

struct SoftOutcome {
  std::vector<Var> allocation;
  std::vector<Var> payments;
};

// Soft allocation softmax(kappa * [w_1..w_n, r0]) and soft payment
// G_i^{-1}(softmax_tau({w_j : j != i} U {r0})).
inline SoftOutcome soft_virtual_auction(Tape& t, const MechanismParams& m,
                                        std::span<const Var> theta, std::span<const Var> bids,
                                        double kappa, double tau) {
  const std::size_t n = bids.size();
  std::vector<Var> slots(n + 1);
  for (std::size_t i = 0; i < n; ++i) slots[i] = virtual_value(t, m, theta, i, bids[i]);
  slots[n] = Tape::constant(m.reserve);
  SoftOutcome out;
  out.allocation = soft_argmax(t, slots, kappa);
  out.allocation.pop_back();
  out.payments.resize(n);
  std::vector<Var> others(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others[k++] = slots[j];
    others[k] = slots[n];
    const Var threshold = soft_max_value(t, others, tau);
    out.payments[i] = virtual_value_inverse(t, m, theta, i, threshold);
  }
  return out;
}

// Mean over the batch of sum_i a_i p_i.
inline Var soft_revenue(Tape& t, const MechanismParams& m, std::span<const Var> theta,
                        const Matrix& bids, double kappa, double tau) {
  std::vector<Var> per_sample(bids.rows);
  std::vector<Var> row(bids.cols);
  for (std::size_t r = 0; r < bids.rows; ++r) {
    for (std::size_t i = 0; i < bids.cols; ++i) row[i] = Tape::constant(bids(r, i));
    SoftOutcome o = soft_virtual_auction(t, m, theta, row, kappa, tau);
    per_sample[r] = dot(t, o.allocation, o.payments);
  }
  return mean(t, per_sample);
}

inline double soft_revenue(const MechanismParams& m, const Matrix& bids, double kappa,
                           double tau) {
  Tape t;
  const std::vector<double> flat = m.flat();
  std::vector<Var> theta(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) theta[i] = Tape::constant(flat[i]);
  return soft_revenue(t, m, theta, bids, kappa, tau).value;
}

inline ValueAndGradient soft_revenue_gradient(const MechanismParams& m, const Matrix& bids,
                                              double kappa, double tau, Tape& tape) {
  return value_and_gradient(
      m.flat(),
      [&](Tape& t, std::span<const Var> theta) {
        return soft_revenue(t, m, theta, bids, kappa, tau);
      },
      tape);
}

// One ascent step theta + lr * grad soft_revenue. Log-slope parametrisation
// keeps every implied slope positive.
inline MechanismParams seller_update(const MechanismParams& theta, const Matrix& bids,
                                     double learning_rate, double kappa, double tau, Tape& tape) {
  if (!(learning_rate >= 0.0)) throw ConfigError("seller learning rate must be >= 0");
  MechanismParams next = theta;
  if (learning_rate == 0.0) return next;
  ValueAndGradient vg = soft_revenue_gradient(theta, bids, kappa, tau, tape);
  std::vector<double> flat = theta.flat();
  for (std::size_t k = 0; k < flat.size(); ++k) flat[k] += learning_rate * vg.gradient[k];
  if (!all_finite(flat)) throw NumericError("seller update produced non-finite parameters");
  next.set_flat(flat);
  return next;
}

// ---------------------------------------------------------------------------
// Baselines.

enum class BaselineKind { kFirstPrice, kSecondPrice, kAnalyticMyerson };

inline Outcome first_price_auction(std::span<const double> bids) {
  Outcome out;
  const std::size_t n = bids.size();
  out.allocation.assign(n, 0);
  out.payments.assign(n, 0.0);
  const std::size_t best = hard_argmax(bids);
  if (!(bids[best] > 0.0)) return out;
  out.winner = static_cast<int>(best);
  out.allocation[best] = 1;
  out.payments[best] = bids[best];
  out.revenue = bids[best];
  return out;
}

// `reported` is required for the analytic Myerson auction and must describe
// uniform bid distributions.
inline Outcome baseline_auction(BaselineKind kind, std::span<const double> bids,
                                std::span<const std::optional<UniformSpec>> reported = {}) {
  switch (kind) {
    case BaselineKind::kFirstPrice:
      return first_price_auction(bids);
    case BaselineKind::kSecondPrice:
      return run_auction(MechanismParams::identity(bids.size()), bids);
    case BaselineKind::kAnalyticMyerson: {
      if (reported.size() != bids.size())
        throw ConfigError("analytic Myerson needs one reported distribution per bidder");
      std::vector<UniformSpec> specs;
      for (const auto& r : reported) {
        if (!r) throw ConfigError("analytic Myerson supports only uniform bid distributions");
        specs.push_back(*r);
      }
      return run_auction(MechanismParams::uniform_myerson(specs), bids);
    }
  }
  throw ConfigError("unknown baseline kind");
}

// ---------------------------------------------------------------------------
// Seller agent.

enum class SellerKind { kMyersonNet, kFirstPrice, kSecondPrice, kAnalyticMyerson };

// Training temperatures: tau (NeuralSort) and 1/kappa (allocation softmax)
// are multiplied by `anneal_factor` every `anneal_every` seller iterations,
// never going below `floor`.
struct Softness {
  double tau = 0.1;
  double kappa = 50.0;
  std::size_t anneal_every = 100;
  double anneal_factor = 0.5;
  double floor = 1e-3;

  double tau_at(std::size_t iteration) const { return temperature(tau, iteration); }
  double kappa_at(std::size_t iteration) const { return 1.0 / temperature(1.0 / kappa, iteration); }

  bool operator==(const Softness&) const = default;

 private:
  double temperature(double t0, std::size_t iteration) const {
    if (anneal_every == 0) return t0;
    const double steps = static_cast<double>(iteration / anneal_every);
    return std::max(floor, t0 * std::pow(anneal_factor, steps));
  }
};

struct SellerConfig {
  SellerKind kind = SellerKind::kMyersonNet;
  std::size_t groups = 5;
  std::size_t pieces = 5;
  double learning_rate = 1.0;
  double reserve = 0.0;
  double init_std = 0.1;
  Softness softness;

  bool operator==(const SellerConfig&) const = default;
};

class Seller {
 public:
  Seller(const SellerConfig& config, std::size_t bidders, std::uint64_t seed)
      : config_(config) {
    if (bidders < 1) throw ConfigError("seller needs at least one bidder");
    switch (config.kind) {
      case SellerKind::kMyersonNet: {
        Rng rng(seed);
        params_ = MechanismParams::random(bidders, config.groups, config.pieces, config.init_std,
                                          config.reserve, rng);
        break;
      }
      case SellerKind::kSecondPrice:
        params_ = MechanismParams::identity(bidders, 0.0);
        break;
      case SellerKind::kAnalyticMyerson:
        params_ = MechanismParams::uniform_myerson(std::vector<UniformSpec>(bidders));
        break;
      case SellerKind::kFirstPrice:
        params_ = MechanismParams::identity(bidders, 0.0);
        break;
    }
  }

  const SellerConfig& config() const { return config_; }
  const MechanismParams& params() const { return params_; }
  void set_params(MechanismParams p) { params_ = std::move(p); }
  std::size_t iterations() const { return iterations_; }
  void set_iterations(std::size_t it) { iterations_ = it; }
  bool learns() const { return config_.kind == SellerKind::kMyersonNet; }
  bool first_price() const { return config_.kind == SellerKind::kFirstPrice; }

  double tau() const { return config_.softness.tau_at(iterations_); }
  double kappa() const { return config_.softness.kappa_at(iterations_); }

  Outcome run(std::span<const double> bids) const {
    return first_price() ? first_price_auction(bids) : run_auction(params_, bids);
  }

  // Soft outcome on the tape with the mechanism held constant.
  SoftOutcome soft_outcome(Tape& t, std::span<const Var> bids, double kappa, double tau) const {
    if (first_price()) {
      std::vector<Var> slots(bids.begin(), bids.end());
      SoftOutcome o;
      o.allocation = soft_argmax(t, slots, kappa);
      o.payments.assign(bids.begin(), bids.end());
      return o;
    }
    const std::vector<double> flat = params_.flat();
    std::vector<Var> theta(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) theta[i] = Tape::constant(flat[i]);
    return soft_virtual_auction(t, params_, theta, bids, kappa, tau);
  }

  // Myerson Net: one revenue-ascent step on the observed bids.
  void update(const Matrix& bids, Tape& tape) {
    if (!learns()) return;
    params_ = seller_update(params_, bids, config_.learning_rate, kappa(), tau(), tape);
    ++iterations_;
  }

  // Analytic Myerson: re-derive the optimal mechanism for reported uniform
  // bid distributions.
  void fit_reported(std::span<const std::optional<UniformSpec>> reported) {
    if (config_.kind != SellerKind::kAnalyticMyerson) return;
    std::vector<UniformSpec> specs;
    for (const auto& r : reported) {
      if (!r) throw ConfigError("analytic Myerson seller needs uniform reported distributions");
      specs.push_back(*r);
    }
    params_ = MechanismParams::uniform_myerson(specs);
  }

 private:
  SellerConfig config_;
  MechanismParams params_;
  std::size_t iterations_ = 0;
};

}  // namespace autobid
