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

// Named experiments. Every preset resolves to one or more fully specified
// EnvironmentConfigs with a pinned default seed.
//
//   fig1              seller-only training against two truthful bidders
//   fig4a, fig4b,     one strategic bidder against a truthful opponent:
//   fig4c             naive bid net, pg linear, pg bid net
//   fig5_rl,          both bidders linear and learning with the same rule
//   fig5_lola,
//   fig5_pg
//   fig6              the three fig5 systems, for the utility comparison
//   t1_1 .. t1_6      strategic bidder 0 against the listed environment;
//                     variants pg_bidnet (default), pg_linear, rl_bidnet,
//                     rl_linear, lola_bidnet, lola_linear, or "all"

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "autobid/arena.hpp"

namespace autobid {

inline constexpr std::uint64_t kDefaultPresetSeed = 1;
inline constexpr std::size_t kSummaryWindow = 100;

struct PresetRun {
  std::string label;  // file stem, e.g. "t1_1.pg_bidnet"
  EnvironmentConfig config;
};

struct Preset {
  std::string id;
  std::size_t window = kSummaryWindow;
  std::vector<PresetRun> runs;
};

inline const std::vector<std::string>& preset_ids() {
  static const std::vector<std::string> ids = {
      "fig1", "fig4a", "fig4b", "fig4c", "fig5_rl", "fig5_lola", "fig5_pg", "fig6",
      "t1_1", "t1_2", "t1_3", "t1_4", "t1_5", "t1_6"};
  return ids;
}

inline const std::vector<std::string>& table_variants() {
  static const std::vector<std::string> v = {"pg_bidnet", "pg_linear", "rl_bidnet",
                                             "rl_linear", "lola_bidnet", "lola_linear"};
  return v;
}

namespace preset_detail {

inline constexpr double kSellerRate = 0.3;
inline constexpr double kReserve = 1e-3;
inline constexpr std::size_t kBidNetWidth = 10;

inline SellerConfig market_seller() {
  SellerConfig s;
  s.learning_rate = kSellerRate;
  s.reserve = kReserve;
  return s;
}

inline BidderConfig truthful(UniformSpec values = {}) {
  BidderConfig b;
  b.values.base = values;
  return b;
}

inline BidderConfig fixed_affine(double alpha, double offset) {
  BidderConfig b;
  b.strategy.kind = StrategyKind::kAffine;
  b.strategy.alpha = alpha;
  b.strategy.offset = offset;
  return b;
}

// Learner defaults per strategy representation.
inline LearnerConfig learner(LearnerKind kind, StrategyKind strategy) {
  LearnerConfig c;
  c.kind = kind;
  c.lookahead_rate = kSellerRate;
  if (strategy == StrategyKind::kBidNet) {
    // 1 -> 10 -> 1 network: 31 parameters.
    const double dim = 3.0 * kBidNetWidth + 1.0;
    c.step_bound = 0.05 * std::sqrt(dim);
    c.directions = 8;
    c.direction_memory = 3;
  } else {
    // In one dimension the only unit directions are +1 and -1.
    c.directions = 2;
    c.direction_memory = 1;
  }
  return c;
}

inline BidderConfig strategic(StrategyKind strategy, LearnerKind kind, UniformSpec values = {},
                              double alpha0 = 1.0) {
  BidderConfig b;
  b.values.base = values;
  b.strategy.kind = strategy;
  b.strategy.alpha = alpha0;
  b.strategy.hidden = {kBidNetWidth};
  b.learner = learner(kind, strategy);
  return b;
}

inline EnvironmentConfig market(std::vector<BidderConfig> bidders, std::uint64_t seed) {
  EnvironmentConfig c;
  c.bidders = std::move(bidders);
  c.seller = market_seller();
  c.rounds = 400;
  c.seed = seed;
  return c;
}

inline void parse_variant(const std::string& v, LearnerKind& kind, StrategyKind& strategy) {
  const auto us = v.find('_');
  if (us == std::string::npos) throw ConfigError("unknown variant '" + v + "'");
  const std::string l = v.substr(0, us), s = v.substr(us + 1);
  if (l == "pg") kind = LearnerKind::kPg;
  else if (l == "rl") kind = LearnerKind::kNaive;
  else if (l == "lola") kind = LearnerKind::kLola;
  else throw ConfigError("unknown variant '" + v + "'");
  if (s == "bidnet") strategy = StrategyKind::kBidNet;
  else if (s == "linear") strategy = StrategyKind::kLinear;
  else throw ConfigError("unknown variant '" + v + "'");
}

// Market environment `row` (1..6) with bidder 0 = the given strategic bidder.
inline EnvironmentConfig table_row(int row, const BidderConfig& me, std::uint64_t seed) {
  BidderConfig b0 = me;
  switch (row) {
    case 1: return market({b0, truthful()}, seed);
    case 2: return market({b0, fixed_affine(0.25, 0.25)}, seed);
    case 3:
      b0.values.base = {0.0, 2.0};
      return market({b0, truthful()}, seed);
    case 4:
      b0.values.scheduled = true;
      return market({b0, truthful()}, seed);
    case 5: return market({b0, truthful(), truthful()}, seed);
    case 6:
      return market({b0, strategic(StrategyKind::kLinear, LearnerKind::kLola)}, seed);
    default: break;
  }
  throw ConfigError("unknown table row");
}

inline EnvironmentConfig symmetric(LearnerKind kind, std::uint64_t seed) {
  // Both bidders start from the same shading so the three rules are compared
  // on one footing.
  constexpr double kAlpha0 = 0.6;
  return market({strategic(StrategyKind::kLinear, kind, {}, kAlpha0),
                 strategic(StrategyKind::kLinear, kind, {}, kAlpha0)},
                seed);
}

}  // namespace preset_detail

inline Preset resolve_preset(const std::string& id, std::uint64_t seed = kDefaultPresetSeed,
                             const std::string& variant = "") {
  using namespace preset_detail;
  Preset p;
  p.id = id;
  auto one = [&](const std::string& label, EnvironmentConfig c) {
    p.runs.push_back({label, std::move(c)});
  };
  auto reject_variant = [&] {
    if (!variant.empty()) throw ConfigError("preset '" + id + "' takes no variant");
  };
  if (id == "fig1") {
    reject_variant();
    EnvironmentConfig c = market({truthful(), truthful()}, seed);
    c.seller.learning_rate = 1.0;  // unshaded U[0,1] bids tolerate the larger step
    c.rounds = 200;
    p.window = 50;
    one(id, c);
  } else if (id == "fig4a" || id == "fig4b" || id == "fig4c") {
    reject_variant();
    const std::string v = id == "fig4a" ? "rl_bidnet" : id == "fig4b" ? "pg_linear" : "pg_bidnet";
    LearnerKind k;
    StrategyKind s;
    parse_variant(v, k, s);
    one(id, table_row(1, strategic(s, k), seed));
  } else if (id == "fig5_rl" || id == "fig5_lola" || id == "fig5_pg") {
    reject_variant();
    const LearnerKind k = id == "fig5_rl" ? LearnerKind::kNaive
                          : id == "fig5_lola" ? LearnerKind::kLola : LearnerKind::kPg;
    one(id, symmetric(k, seed));
  } else if (id == "fig6") {
    reject_variant();
    one("fig6.pg", symmetric(LearnerKind::kPg, seed));
    one("fig6.lola", symmetric(LearnerKind::kLola, seed));
    one("fig6.rl", symmetric(LearnerKind::kNaive, seed));
  } else if (id.size() == 4 && id.rfind("t1_", 0) == 0 && id[3] >= '1' && id[3] <= '6') {
    const int row = id[3] - '0';
    std::vector<std::string> variants;
    if (variant.empty()) variants = {"pg_bidnet"};
    else if (variant == "all") variants = table_variants();
    else variants = {variant};
    for (const std::string& v : variants) {
      LearnerKind k;
      StrategyKind s;
      parse_variant(v, k, s);
      one(id + "." + v, table_row(row, strategic(s, k), seed));
    }
  } else {
    throw ConfigError("unknown preset '" + id + "'");
  }
  for (PresetRun& r : p.runs) r.config.validate();
  return p;
}

}  // namespace autobid
