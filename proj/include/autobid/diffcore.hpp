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

// Numeric core: named parameter vectors and a scalar reverse-mode tape with
// a fixed set of primitives (affine, exp, softplus, softmax, min/max
// selection and the sorting relaxations in softsort.hpp).
//
// A Tape records nodes in evaluation order. Each node stores its value and
// the local partial derivatives with respect to its parents; backward()
// accumulates adjoints in one reverse sweep. Constants never enter the tape.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "autobid/common.hpp"

namespace autobid {

struct Segment {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;

  std::size_t size() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }
  bool operator==(const Segment&) const = default;
};

// Flat parameter storage with named, shaped segments. The layout is fixed
// once segments are added; values may change.
class ParamVector {
 public:
  ParamVector() = default;

  std::span<double> add_segment(std::string name, std::vector<std::size_t> shape,
                                double fill = 0.0) {
    if (find(name) != nullptr) throw ConfigError("duplicate segment '" + name + "'");
    Segment seg{std::move(name), std::move(shape), values_.size()};
    values_.resize(values_.size() + seg.size(), fill);
    segments_.push_back(std::move(seg));
    const Segment& s = segments_.back();
    return {values_.data() + s.offset, s.size()};
  }

  std::span<double> segment(std::string_view name) {
    const Segment& s = info(name);
    return {values_.data() + s.offset, s.size()};
  }
  std::span<const double> segment(std::string_view name) const {
    const Segment& s = info(name);
    return {values_.data() + s.offset, s.size()};
  }

  const Segment& info(std::string_view name) const {
    const Segment* s = find(name);
    if (s == nullptr) throw ConfigError("no segment named '" + std::string(name) + "'");
    return *s;
  }
  bool has_segment(std::string_view name) const { return find(name) != nullptr; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<Segment>& segments() const { return segments_; }

  bool same_layout(const ParamVector& other) const { return segments_ == other.segments_; }

  // Zero-filled vector with the same layout (used for gradients).
  ParamVector zeros_like() const {
    ParamVector out = *this;
    std::fill(out.values_.begin(), out.values_.end(), 0.0);
    return out;
  }

  void check_finite() const {
    if (!all_finite(values_)) throw NumericError("parameter vector has non-finite entries");
  }

  bool operator==(const ParamVector&) const = default;

 private:
  const Segment* find(std::string_view name) const {
    for (const auto& s : segments_)
      if (s.name == name) return &s;
    return nullptr;
  }

  std::vector<double> values_;
  std::vector<Segment> segments_;
};

// Handle to a tape node, or a constant when id < 0.
struct Var {
  std::int32_t id = -1;
  double value = 0.0;

  bool is_constant() const { return id < 0; }
};

struct Edge {
  Var parent;
  double partial;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var variable(double v) { return push(v, "leaf", {}); }
  static Var constant(double v) { return Var{-1, v}; }

  Var push(double value, const char* op, std::initializer_list<Edge> edges) {
    return push(value, op, std::span<const Edge>(edges.begin(), edges.size()));
  }

  Var push(double value, const char* op, std::span<const Edge> edges) {
    const auto id = static_cast<std::int32_t>(values_.size());
    if (!std::isfinite(value)) fail(id, op, "value");
    for (const Edge& e : edges) {
      if (e.parent.is_constant()) continue;
      if (!std::isfinite(e.partial)) fail(id, op, "partial derivative");
      parents_.push_back(e.parent.id);
      partials_.push_back(e.partial);
    }
    values_.push_back(value);
    edge_end_.push_back(static_cast<std::uint32_t>(parents_.size()));
    return Var{id, value};
  }

  // Adjoints d(output)/d(node) for every node recorded so far.
  void backward(Var output, std::vector<double>& adjoint) const {
    adjoint.assign(values_.size(), 0.0);
    if (output.is_constant()) return;
    adjoint[output.id] = 1.0;
    for (std::int64_t n = output.id; n >= 0; --n) {
      const double a = adjoint[n];
      if (a == 0.0) continue;
      const std::uint32_t begin = n == 0 ? 0 : edge_end_[n - 1];
      const std::uint32_t end = edge_end_[n];
      for (std::uint32_t e = begin; e < end; ++e) adjoint[parents_[e]] += a * partials_[e];
    }
  }
  std::vector<double> backward(Var output) const {
    std::vector<double> adjoint;
    backward(output, adjoint);
    return adjoint;
  }

  std::size_t size() const { return values_.size(); }
  void clear() {
    values_.clear();
    edge_end_.clear();
    parents_.clear();
    partials_.clear();
  }

 private:
  [[noreturn]] static void fail(std::int32_t id, const char* op, const char* what) {
    throw NumericError("non-finite " + std::string(what) + " at tape node " +
                       std::to_string(id) + " (" + op + ")");
  }

  std::vector<double> values_;
  std::vector<std::uint32_t> edge_end_;
  std::vector<std::int32_t> parents_;
  std::vector<double> partials_;
};

// ---------------------------------------------------------------------------
// Primitives.

inline Var add(Tape& t, Var a, Var b) {
  if (a.is_constant() && b.is_constant()) return Tape::constant(a.value + b.value);
  return t.push(a.value + b.value, "add", {{a, 1.0}, {b, 1.0}});
}

inline Var sub(Tape& t, Var a, Var b) {
  if (a.is_constant() && b.is_constant()) return Tape::constant(a.value - b.value);
  return t.push(a.value - b.value, "sub", {{a, 1.0}, {b, -1.0}});
}

inline Var mul(Tape& t, Var a, Var b) {
  if (a.is_constant() && b.is_constant()) return Tape::constant(a.value * b.value);
  return t.push(a.value * b.value, "mul", {{a, b.value}, {b, a.value}});
}

inline Var scale(Tape& t, Var a, double c) {
  if (a.is_constant()) return Tape::constant(a.value * c);
  return t.push(a.value * c, "scale", {{a, c}});
}

inline Var shift(Tape& t, Var a, double c) {
  if (a.is_constant()) return Tape::constant(a.value + c);
  return t.push(a.value + c, "shift", {{a, 1.0}});
}

inline Var exp(Tape& t, Var a) {
  const double e = std::exp(a.value);
  if (a.is_constant()) return Tape::constant(e);
  return t.push(e, "exp", {{a, e}});
}

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Var softplus(Tape& t, Var a) {
  const double v = softplus(a.value);
  if (a.is_constant()) return Tape::constant(v);
  return t.push(v, "softplus", {{a, sigmoid(a.value)}});
}

// e^{log_slope} * x + intercept: the positive-slope affine unit shared by the
// virtual-value and bidding networks.
inline Var exp_affine(Tape& t, Var log_slope, Var x, Var intercept) {
  const double s = std::exp(log_slope.value);
  const double v = s * x.value + intercept.value;
  if (log_slope.is_constant() && x.is_constant() && intercept.is_constant())
    return Tape::constant(v);
  return t.push(v, "exp_affine", {{log_slope, s * x.value}, {x, s}, {intercept, 1.0}});
}

// Sum of w_k * x_k + b over spans of equal length.
inline Var affine(Tape& t, std::span<const Var> w, std::span<const Var> x, Var b) {
  double v = b.value;
  for (std::size_t k = 0; k < w.size(); ++k) v += w[k].value * x[k].value;
  std::vector<Edge> edges;
  edges.reserve(2 * w.size() + 1);
  for (std::size_t k = 0; k < w.size(); ++k) {
    edges.push_back({w[k], x[k].value});
    edges.push_back({x[k], w[k].value});
  }
  edges.push_back({b, 1.0});
  bool constant = true;
  for (const Edge& e : edges) constant = constant && e.parent.is_constant();
  if (constant) return Tape::constant(v);
  return t.push(v, "affine", edges);
}

inline Var sum(Tape& t, std::span<const Var> xs, double factor = 1.0) {
  double v = 0.0;
  std::vector<Edge> edges;
  edges.reserve(xs.size());
  for (const Var& x : xs) {
    v += x.value;
    edges.push_back({x, factor});
  }
  v *= factor;
  bool constant = std::all_of(xs.begin(), xs.end(), [](Var x) { return x.is_constant(); });
  if (constant) return Tape::constant(v);
  return t.push(v, "sum", edges);
}

// sum_k a_k * b_k
inline Var dot(Tape& t, std::span<const Var> a, std::span<const Var> b) {
  double v = 0.0;
  std::vector<Edge> edges;
  edges.reserve(2 * a.size());
  bool constant = true;
  for (std::size_t k = 0; k < a.size(); ++k) {
    v += a[k].value * b[k].value;
    edges.push_back({a[k], b[k].value});
    edges.push_back({b[k], a[k].value});
    constant = constant && a[k].is_constant() && b[k].is_constant();
  }
  if (constant) return Tape::constant(v);
  return t.push(v, "dot", edges);
}

inline Var mean(Tape& t, std::span<const Var> xs) {
  if (xs.empty()) throw ConfigError("mean of an empty set");
  return sum(t, xs, 1.0 / static_cast<double>(xs.size()));
}

// softmax(scale * x); returns one node per output.
inline std::vector<Var> softmax(Tape& t, std::span<const Var> xs, double scale = 1.0) {
  const std::size_t n = xs.size();
  double mx = -INFINITY;
  for (const Var& x : xs) mx = std::max(mx, scale * x.value);
  std::vector<double> p(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += (p[i] = std::exp(scale * xs[i].value - mx));
  for (double& pi : p) pi /= z;
  std::vector<Var> out(n);
  std::vector<Edge> edges(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool constant = true;
    for (std::size_t j = 0; j < n; ++j) {
      edges[j] = {xs[j], scale * p[i] * ((i == j ? 1.0 : 0.0) - p[j])};
      constant = constant && xs[j].is_constant();
    }
    out[i] = constant ? Tape::constant(p[i]) : t.push(p[i], "softmax", edges);
  }
  return out;
}

// Hard selections with a subgradient through the selected argument. Ties go
// to the first argument.
inline Var min2(Var a, Var b) { return b.value < a.value ? b : a; }
inline Var max2(Var a, Var b) { return b.value > a.value ? b : a; }

// ---------------------------------------------------------------------------
// Small feedforward networks. Layer k owns segments "layer<k>.weight"
// [out, in] and "layer<k>.bias" [out]; hidden layers use softplus, the
// output layer is linear.

inline ParamVector make_mlp(std::span<const std::size_t> widths) {
  if (widths.size() < 2) throw ConfigError("an MLP needs at least input and output widths");
  ParamVector p;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    p.add_segment("layer" + std::to_string(k) + ".weight", {widths[k + 1], widths[k]});
    p.add_segment("layer" + std::to_string(k) + ".bias", {widths[k + 1]});
  }
  return p;
}

inline std::size_t mlp_layers(const ParamVector& p) {
  std::size_t k = 0;
  while (p.has_segment("layer" + std::to_string(k) + ".weight")) ++k;
  return k;
}

inline std::vector<double> mlp_forward(const ParamVector& params, std::span<const double> x) {
  const std::size_t layers = mlp_layers(params);
  if (layers == 0) throw ConfigError("parameter vector has no MLP layers");
  std::vector<double> act(x.begin(), x.end());
  for (std::size_t k = 0; k < layers; ++k) {
    const std::string prefix = "layer" + std::to_string(k);
    const Segment& ws = params.info(prefix + ".weight");
    const std::size_t out = ws.shape[0], in = ws.shape[1];
    if (in != act.size())
      throw ConfigError(prefix + ": expected input width " + std::to_string(in) + ", got " +
                        std::to_string(act.size()));
    auto w = params.segment(prefix + ".weight");
    auto b = params.segment(prefix + ".bias");
    std::vector<double> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * act[i];
      next[o] = (k + 1 < layers) ? softplus(s) : s;
    }
    act = std::move(next);
  }
  return act;
}

// Tape version; `leaves` holds one Var per entry of params.values().
inline std::vector<Var> mlp_forward(Tape& t, const ParamVector& params,
                                    std::span<const Var> leaves, std::span<const Var> x) {
  const std::size_t layers = mlp_layers(params);
  if (layers == 0) throw ConfigError("parameter vector has no MLP layers");
  std::vector<Var> act(x.begin(), x.end());
  for (std::size_t k = 0; k < layers; ++k) {
    const std::string prefix = "layer" + std::to_string(k);
    const Segment& ws = params.info(prefix + ".weight");
    const Segment& bs = params.info(prefix + ".bias");
    const std::size_t out = ws.shape[0], in = ws.shape[1];
    if (in != act.size())
      throw ConfigError(prefix + ": expected input width " + std::to_string(in) + ", got " +
                        std::to_string(act.size()));
    std::vector<Var> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      Var s = affine(t, leaves.subspan(ws.offset + o * in, in), act, leaves[bs.offset + o]);
      next[o] = (k + 1 < layers) ? softplus(t, s) : s;
    }
    act = std::move(next);
  }
  return act;
}

// Leaves for every parameter, recorded first so their ids are 0..size-1.
inline std::vector<Var> parameter_leaves(Tape& t, std::span<const double> values) {
  std::vector<Var> leaves;
  leaves.reserve(values.size());
  for (double v : values) leaves.push_back(t.variable(v));
  return leaves;
}

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

// Evaluates loss(tape, leaves) on a fresh tape and returns d loss / d leaf.
// The tape is cleared first and may be reused across calls.
template <class LossFn>
ValueAndGradient value_and_gradient(std::span<const double> params, LossFn&& loss, Tape& tape) {
  tape.clear();
  std::vector<Var> leaves = parameter_leaves(tape, params);
  Var out = loss(tape, std::span<const Var>(leaves));
  std::vector<double> adjoint;
  tape.backward(out, adjoint);
  ValueAndGradient r;
  r.value = out.value;
  r.gradient.assign(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!out.is_constant() && static_cast<std::size_t>(leaves[i].id) < adjoint.size())
      r.gradient[i] = adjoint[leaves[i].id];
  if (!all_finite(r.gradient)) throw NumericError("non-finite gradient");
  return r;
}

template <class LossFn>
ParamVector gradient(const ParamVector& params, LossFn&& loss) {
  Tape tape;
  ValueAndGradient vg = value_and_gradient(params.values(), std::forward<LossFn>(loss), tape);
  ParamVector g = params.zeros_like();
  std::copy(vg.gradient.begin(), vg.gradient.end(), g.values().begin());
  return g;
}

}  // namespace autobid
