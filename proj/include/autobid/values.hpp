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

#pragma once

#include <string>
#include <vector>

#include "autobid/common.hpp"

namespace autobid {

// U[lo, hi] with hi > lo >= 0.
struct UniformSpec {
  double lo = 0.0;
  double hi = 1.0;

  void validate(const std::string& field = "values") const {
    if (!(lo >= 0.0)) throw ConfigError(field + ".lo must be >= 0");
    if (!(hi > lo)) throw ConfigError(field + ".hi must be greater than " + field + ".lo");
  }
  double density() const { return 1.0 / (hi - lo); }
  bool contains(double v) const { return v >= lo && v <= hi; }
  double sample(Rng& rng) const { return rng.uniform(lo, hi); }

  bool operator==(const UniformSpec&) const = default;
};

// A bidder's private value distribution. The scheduled form grows the upper
// end over the run: at round n of N the support is [lo, hi * (n / N + 1)].
struct ValueDistribution {
  UniformSpec base;
  bool scheduled = false;

  UniformSpec at(std::size_t round, std::size_t total_rounds) const {
    if (!scheduled || total_rounds == 0) return base;
    const double growth =
        static_cast<double>(round) / static_cast<double>(total_rounds) + 1.0;
    return UniformSpec{base.lo, base.hi * growth};
  }

  bool operator==(const ValueDistribution&) const = default;
};

// rows x bidders matrix of independent draws.
inline Matrix sample_values(std::span<const UniformSpec> specs, std::size_t rows, Rng& rng) {
  Matrix m(rows, specs.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < specs.size(); ++i) m(r, i) = specs[i].sample(rng);
  return m;
}

}  // namespace autobid
