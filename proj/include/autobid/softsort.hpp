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

// Differentiable relaxations of sort / min / max / argmax.
//
// neural_sort() is the deterministic NeuralSort operator: row i (1-based) of
// the relaxed permutation is
//
//     softmax( ((n + 1 - 2 i) s - A_s 1) / tau ),   A_s[j][k] = |s_j - s_k|,
//
// which tends to the descending-sort permutation matrix as tau -> 0. The
// scalar helpers soft_min2() and soft_max_value() are its last and first
// rows contracted with the scores.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "autobid/common.hpp"
#include "autobid/diffcore.hpp"

namespace autobid {

struct RelaxedPermutation {
  Matrix matrix;  // n x n, row-stochastic
  double temperature = 1.0;

  std::size_t size() const { return matrix.rows; }
};

namespace detail {

inline void require_positive(double tau, const char* name) {
  if (!(tau > 0.0)) throw ConfigError(std::string(name) + " must be positive");
}

inline int sign(double x) { return (x > 0.0) - (x < 0.0); }

// Logits of row `i` (0-based) of the NeuralSort matrix.
inline void neural_sort_logits(std::span<const double> s, std::size_t i, double tau,
                               std::span<double> out) {
  const std::size_t n = s.size();
  const double coeff = static_cast<double>(n) + 1.0 - 2.0 * static_cast<double>(i + 1);
  for (std::size_t j = 0; j < n; ++j) {
    double a = 0.0;
    for (std::size_t k = 0; k < n; ++k) a += std::abs(s[j] - s[k]);
    out[j] = (coeff * s[j] - a) / tau;
  }
}

inline void softmax_inplace(std::span<double> x) {
  const double mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (double& v : x) z += (v = std::exp(v - mx));
  for (double& v : x) v /= z;
}

}  // namespace detail

inline RelaxedPermutation neural_sort(std::span<const double> scores, double tau) {
  detail::require_positive(tau, "NeuralSort temperature");
  const std::size_t n = scores.size();
  if (n == 0) throw ConfigError("NeuralSort needs at least one score");
  RelaxedPermutation p{Matrix(n, n), tau};
  for (std::size_t i = 0; i < n; ++i) {
    detail::neural_sort_logits(scores, i, tau, p.matrix.row(i));
    detail::softmax_inplace(p.matrix.row(i));
  }
  return p;
}

// Tape version, row-major n x n.
inline std::vector<Var> neural_sort(Tape& t, std::span<const Var> scores, double tau) {
  detail::require_positive(tau, "NeuralSort temperature");
  const std::size_t n = scores.size();
  if (n == 0) throw ConfigError("NeuralSort needs at least one score");
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = scores[j].value;
  std::vector<Var> out;
  out.reserve(n * n);
  std::vector<double> logits(n);
  std::vector<Var> logit_vars(n);
  std::vector<Edge> edges(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::neural_sort_logits(s, i, tau, logits);
    const double coeff = static_cast<double>(n) + 1.0 - 2.0 * static_cast<double>(i + 1);
    for (std::size_t j = 0; j < n; ++j) {
      // d logit_j / d s_m = [coeff d_jm - d_jm sum_k sgn(s_j - s_k) + sgn(s_j - s_m)] / tau
      double self = coeff;
      for (std::size_t k = 0; k < n; ++k) self -= detail::sign(s[j] - s[k]);
      bool constant = true;
      for (std::size_t m = 0; m < n; ++m) {
        double d = detail::sign(s[j] - s[m]);
        if (m == j) d += self;
        edges[m] = {scores[m], d / tau};
        constant = constant && scores[m].is_constant();
      }
      logit_vars[j] = constant ? Tape::constant(logits[j]) : t.push(logits[j], "neural_sort", edges);
    }
    for (Var v : softmax(t, logit_vars)) out.push_back(v);
  }
  return out;
}

// Smooth minimum of two numbers: the last NeuralSort row of (x, y) applied
// to (x, y), i.e. x * sigmoid((y - x) / tau) + y * sigmoid((x - y) / tau).
inline double soft_min2(double x, double y, double tau) {
  detail::require_positive(tau, "soft-min temperature");
  const double p = sigmoid((y - x) / tau);
  return p * x + (1.0 - p) * y;
}

inline Var soft_min2(Tape& t, Var x, Var y, double tau) {
  detail::require_positive(tau, "soft-min temperature");
  const double p = sigmoid((y.value - x.value) / tau);
  const double v = p * x.value + (1.0 - p) * y.value;
  if (x.is_constant() && y.is_constant()) return Tape::constant(v);
  const double cross = (x.value - y.value) * p * (1.0 - p) / tau;
  return t.push(v, "soft_min2", {{x, p - cross}, {y, (1.0 - p) + cross}});
}

// Smooth maximum: first NeuralSort row applied to the scores.
inline double soft_max_value(std::span<const double> s, double tau) {
  detail::require_positive(tau, "soft-max temperature");
  std::vector<double> p(s.size());
  detail::neural_sort_logits(s, 0, tau, p);
  detail::softmax_inplace(p);
  return dot(p, s);
}

inline Var soft_max_value(Tape& t, std::span<const Var> xs, double tau) {
  detail::require_positive(tau, "soft-max temperature");
  const std::size_t n = xs.size();
  if (n == 1) return xs[0];
  // Stack storage for the common small cases (n <= 8 bidders).
  double sbuf[8], pbuf[8];
  Edge ebuf[8];
  std::vector<double> sheap, pheap;
  std::vector<Edge> eheap;
  double* s = sbuf;
  double* p = pbuf;
  Edge* edges = ebuf;
  if (n > 8) {
    sheap.resize(n);
    pheap.resize(n);
    eheap.resize(n);
    s = sheap.data();
    p = pheap.data();
    edges = eheap.data();
  }
  bool constant = true;
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = xs[j].value;
    constant = constant && xs[j].is_constant();
  }
  detail::neural_sort_logits({s, n}, 0, tau, {p, n});
  detail::softmax_inplace({p, n});
  double m = 0.0;
  for (std::size_t j = 0; j < n; ++j) m += p[j] * s[j];
  if (constant) return Tape::constant(m);
  const double coeff = static_cast<double>(n) - 1.0;
  // dm/ds_q = p_q + sum_j (s_j - m) p_j dc_j/ds_q
  for (std::size_t q = 0; q < n; ++q) edges[q] = {xs[q], p[q]};
  for (std::size_t j = 0; j < n; ++j) {
    const double w = (s[j] - m) * p[j] / tau;
    if (w == 0.0) continue;
    double self = coeff;
    for (std::size_t k = 0; k < n; ++k) self -= detail::sign(s[j] - s[k]);
    for (std::size_t q = 0; q < n; ++q) {
      double d = detail::sign(s[j] - s[q]);
      if (q == j) d += self;
      edges[q].partial += w * d;
    }
  }
  return t.push(m, "soft_max", std::span<const Edge>(edges, n));
}

inline std::vector<double> soft_argmax(std::span<const double> scores, double kappa) {
  detail::require_positive(kappa, "soft-argmax sharpness");
  std::vector<double> w(scores.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = kappa * scores[i];
  detail::softmax_inplace(w);
  return w;
}

inline std::vector<Var> soft_argmax(Tape& t, std::span<const Var> scores, double kappa) {
  detail::require_positive(kappa, "soft-argmax sharpness");
  return softmax(t, scores, kappa);
}

// Index of the largest score; ties go to the lowest index.
inline std::size_t hard_argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

// order[r] = index of the r-th largest score (stable on ties).
inline std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace autobid
