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

// Bidding strategies.
//
// Bid Net: a monotone MLP B*(v) (positive weights through an exponential
// parametrisation, softplus activations and a softplus output head) whose
// output is clamped by the value, B(v) = min(B*(v), v). The clamp keeps
// 0 <= B(v) <= v; on gradient paths the min is replaced by soft_min2.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "autobid/common.hpp"
#include "autobid/diffcore.hpp"
#include "autobid/softsort.hpp"
#include "autobid/values.hpp"

namespace autobid {

enum class StrategyKind { kTruthful, kLinear, kAffine, kBidNet };

struct BidMode {
  bool soft = false;
  double tau = 0.1;

  static BidMode hard() { return {}; }
  static BidMode smooth(double tau) { return {true, tau}; }
};

class Strategy {
 public:
  Strategy() = default;

  static Strategy truthful() { return Strategy(StrategyKind::kTruthful, ParamVector{}); }

  static Strategy linear(double alpha) {
    ParamVector p;
    p.add_segment("alpha", {1}, alpha);
    return Strategy(StrategyKind::kLinear, std::move(p));
  }

  // alpha * v + offset
  static Strategy affine(double alpha, double offset) {
    ParamVector p;
    p.add_segment("alpha", {1}, alpha);
    p.add_segment("offset", {1}, offset);
    return Strategy(StrategyKind::kAffine, std::move(p));
  }

  // Layout: layer<k>.log_weight [out, in], layer<k>.bias [out] for every
  // hidden layer, then out.log_weight [1, last], out.bias [1].
  static Strategy bidnet(ParamVector params) {
    if (!params.has_segment("out.bias")) throw ConfigError("bid net parameters lack 'out.bias'");
    return Strategy(StrategyKind::kBidNet, std::move(params));
  }

  StrategyKind kind() const { return kind_; }
  const ParamVector& params() const { return params_; }
  std::size_t dim() const { return params_.size(); }
  bool learnable() const { return kind_ != StrategyKind::kTruthful; }

  Strategy with_params(std::span<const double> values) const {
    if (values.size() != params_.size()) throw ConfigError("strategy parameter size mismatch");
    Strategy s = *this;
    std::copy(values.begin(), values.end(), s.params_.values().begin());
    s.refresh();
    return s;
  }

  // Shading coefficient for linear/affine, 1 for truthful, parameter norm
  // for a bid net.
  double summary() const {
    switch (kind_) {
      case StrategyKind::kTruthful: return 1.0;
      case StrategyKind::kLinear:
      case StrategyKind::kAffine: return params_.values()[0];
      case StrategyKind::kBidNet: return l2_norm(params_.values());
    }
    return 0.0;
  }

  double bid(double v, BidMode mode = BidMode::hard()) const {
    if (v < 0.0) throw InputError("values must be nonnegative");
    switch (kind_) {
      case StrategyKind::kTruthful: return v;
      case StrategyKind::kLinear: return params_.values()[0] * v;
      case StrategyKind::kAffine: return params_.values()[0] * v + params_.values()[1];
      case StrategyKind::kBidNet: {
        const double inner = bidnet_inner(v);
        return mode.soft ? soft_min2(inner, v, mode.tau) : std::max(0.0, std::min(inner, v));
      }
    }
    return v;
  }

  // Unclamped Bid Net output B*(v).
  double bidnet_inner(double v) const {
    if (kind_ != StrategyKind::kBidNet) throw ConfigError("not a bid net");
    double* a = scratch_a_.data();
    double* b = scratch_b_.data();
    a[0] = v;
    std::size_t width = 1;
    for (const Layer& layer : layers_) {
      auto bias = params_.values().subspan(layer.bias, layer.out);
      for (std::size_t o = 0; o < layer.out; ++o) {
        double s = bias[o];
        const double* w = weights_.data() + layer.weight_cache + o * layer.in;
        for (std::size_t i = 0; i < width; ++i) s += w[i] * a[i];
        b[o] = layer.hidden ? softplus(s) : s;
      }
      width = layer.out;
      std::swap(a, b);
    }
    return softplus(a[0]);
  }

  // Soft bid on the tape; `leaves` has one Var per parameter.
  Var bid(Tape& t, std::span<const Var> leaves, double v, double tau) const {
    if (v < 0.0) throw InputError("values must be nonnegative");
    const Var value = Tape::constant(v);
    switch (kind_) {
      case StrategyKind::kTruthful: return value;
      case StrategyKind::kLinear: return scale(t, leaves[0], v);
      case StrategyKind::kAffine: return add(t, scale(t, leaves[0], v), leaves[1]);
      case StrategyKind::kBidNet: break;
    }
    std::vector<Var> act{value};
    for (const Layer& layer : layers_) {
      std::vector<Var> next(layer.out);
      for (std::size_t o = 0; o < layer.out; ++o) {
        // softplus( sum_i e^{lw_oi} a_i + b_o ), fused
        double s = leaves[layer.bias + o].value;
        const double* w = weights_.data() + layer.weight_cache + o * layer.in;
        for (std::size_t i = 0; i < act.size(); ++i) s += w[i] * act[i].value;
        const double y = layer.hidden ? softplus(s) : s;
        const double dy = layer.hidden ? sigmoid(s) : 1.0;
        std::vector<Edge> edges;
        edges.reserve(2 * act.size() + 1);
        for (std::size_t i = 0; i < act.size(); ++i) {
          edges.push_back({leaves[layer.log_weight + o * layer.in + i], dy * w[i] * act[i].value});
          edges.push_back({act[i], dy * w[i]});
        }
        edges.push_back({leaves[layer.bias + o], dy});
        next[o] = t.push(y, "bidnet_unit", edges);
      }
      act = std::move(next);
    }
    const Var inner = softplus(t, act[0]);
    return soft_min2(t, inner, value, tau);
  }

 private:
  struct Layer {
    std::size_t in = 0, out = 0;
    std::size_t log_weight = 0, bias = 0;  // offsets into params_
    std::size_t weight_cache = 0;          // offset into weights_
    bool hidden = true;
  };

  Strategy(StrategyKind kind, ParamVector params) : kind_(kind), params_(std::move(params)) {
    params_.check_finite();
    if (kind_ == StrategyKind::kBidNet) build_layers();
    refresh();
  }

  void build_layers() {
    layers_.clear();
    std::size_t cache = 0, widest = 1;
    for (std::size_t k = 0;; ++k) {
      const std::string prefix = "layer" + std::to_string(k);
      if (!params_.has_segment(prefix + ".log_weight")) break;
      const Segment& w = params_.info(prefix + ".log_weight");
      layers_.push_back({w.shape[1], w.shape[0], w.offset, params_.info(prefix + ".bias").offset,
                         cache, true});
      cache += w.size();
      widest = std::max(widest, w.shape[0]);
    }
    const Segment& w = params_.info("out.log_weight");
    layers_.push_back({w.shape[1], w.shape[0], w.offset, params_.info("out.bias").offset, cache,
                       false});
    cache += w.size();
    std::size_t width = 1;
    for (const Layer& l : layers_) {
      if (l.in != width) throw ConfigError("bid net layer widths do not chain");
      width = l.out;
    }
    if (width != 1) throw ConfigError("bid net output must be scalar");
    weights_.assign(cache, 0.0);
    scratch_a_.assign(widest, 0.0);
    scratch_b_.assign(widest, 0.0);
  }

  void refresh() {
    for (const Layer& l : layers_) {
      auto lw = params_.values().subspan(l.log_weight, l.in * l.out);
      for (std::size_t k = 0; k < lw.size(); ++k) weights_[l.weight_cache + k] = std::exp(lw[k]);
    }
  }

  StrategyKind kind_ = StrategyKind::kTruthful;
  ParamVector params_;
  std::vector<Layer> layers_;
  std::vector<double> weights_;  // e^{log_weight}
  mutable std::vector<double> scratch_a_, scratch_b_;
};

inline double apply_strategy(const Strategy& s, double v, BidMode mode = BidMode::hard()) {
  return s.bid(v, mode);
}

// Deterministic Bid Net initialisation: log-weights and biases drawn around
// a near-identity map, then the output bias is set so that B*(1) = 1, which
// leaves the initial clamped strategy close to truthful.
inline Strategy bidnet_init(std::span<const std::size_t> hidden_widths, std::uint64_t seed) {
  if (hidden_widths.empty()) throw ConfigError("bid net needs at least one hidden layer");
  Rng rng(seed);
  ParamVector p;
  std::size_t in = 1;
  for (std::size_t k = 0; k < hidden_widths.size(); ++k) {
    const std::size_t out = hidden_widths[k];
    if (out < 1) throw ConfigError("bid net widths must be >= 1");
    const std::string prefix = "layer" + std::to_string(k);
    auto lw = p.add_segment(prefix + ".log_weight", {out, in});
    for (double& w : lw) w = rng.normal(-std::log(static_cast<double>(in)), 0.3);
    auto b = p.add_segment(prefix + ".bias", {out});
    for (double& x : b) x = rng.normal(0.0, 0.3);
    in = out;
  }
  auto ow = p.add_segment("out.log_weight", {1, in});
  for (double& w : ow) w = rng.normal(-std::log(static_cast<double>(in)), 0.1);
  p.add_segment("out.bias", {1}, 0.0);
  Strategy s = Strategy::bidnet(p);
  // softplus(z(1) + c) = 1  =>  c = log(e - 1) - z(1), where z is the
  // pre-head output with zero output bias.
  const double target = std::log(std::exp(1.0) - 1.0);
  double inner = s.bidnet_inner(1.0);                 // softplus(z(1))
  double z = inner > 30.0 ? inner : std::log(std::expm1(inner));  // invert softplus
  std::vector<double> values(p.values().begin(), p.values().end());
  values.back() = target - z;
  return s.with_params(values);
}

inline Strategy bidnet_init(std::initializer_list<std::size_t> hidden_widths, std::uint64_t seed) {
  std::vector<std::size_t> w(hidden_widths);
  return bidnet_init(std::span<const std::size_t>(w), seed);
}

// Distribution of B(v) for v ~ U[lo, hi] when it is again uniform.
inline std::optional<UniformSpec> reported_distribution(const Strategy& s,
                                                        const UniformSpec& values) {
  switch (s.kind()) {
    case StrategyKind::kTruthful: return values;
    case StrategyKind::kLinear:
    case StrategyKind::kAffine: {
      const double alpha = s.params().values()[0];
      const double offset = s.kind() == StrategyKind::kAffine ? s.params().values()[1] : 0.0;
      if (!(alpha > 0.0)) return std::nullopt;
      return UniformSpec{offset + alpha * values.lo, offset + alpha * values.hi};
    }
    case StrategyKind::kBidNet: return std::nullopt;
  }
  return std::nullopt;
}

inline std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::kTruthful: return "truthful";
    case StrategyKind::kLinear: return "linear";
    case StrategyKind::kAffine: return "affine";
    case StrategyKind::kBidNet: return "bidnet";
  }
  return "?";
}

}  // namespace autobid
