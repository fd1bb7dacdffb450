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

// The repeated auction. One round:
//   1. the seller announces theta,
//   2. a batch of values is drawn and every bidder bids with its current
//      (hard) strategy,
//   3. the mechanism settles each auction; mean utilities and revenue are
//      recorded,
//   4. every learning bidder updates against the announced theta and the
//      strategies of this round,
//   5. the seller updates last, on the bids it just observed.

#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "autobid/bidders.hpp"
#include "autobid/common.hpp"
#include "autobid/learners.hpp"
#include "autobid/mechanisms.hpp"
#include "autobid/values.hpp"

namespace autobid {

struct StrategyInit {
  StrategyKind kind = StrategyKind::kTruthful;
  double alpha = 1.0;
  double offset = 0.0;
  std::vector<std::size_t> hidden = {10};

  bool operator==(const StrategyInit&) const = default;
};

struct BidderConfig {
  ValueDistribution values;
  StrategyInit strategy;
  LearnerConfig learner;

  bool operator==(const BidderConfig&) const = default;
};

struct EnvironmentConfig {
  std::vector<BidderConfig> bidders;
  SellerConfig seller;
  std::size_t rounds = 400;
  std::size_t batch = 2048;
  std::uint64_t seed = 0;
  bool expose_opponent_params = true;

  void validate() const {
    if (bidders.size() < 2) throw ConfigError("bidders must list at least 2 bidders");
    if (batch < 1) throw ConfigError("batch must be >= 1");
    for (std::size_t i = 0; i < bidders.size(); ++i) {
      const std::string field = "bidders[" + std::to_string(i) + "]";
      const BidderConfig& b = bidders[i];
      b.values.base.validate(field + ".values");
      b.learner.validate(field + ".learner");
      if (b.learner.kind != LearnerKind::kStatic && b.strategy.kind == StrategyKind::kTruthful)
        throw ConfigError(field + ".strategy: a truthful strategy cannot learn");
      if (b.strategy.kind == StrategyKind::kBidNet) {
        if (b.strategy.hidden.empty()) throw ConfigError(field + ".strategy.hidden is empty");
        for (std::size_t w : b.strategy.hidden)
          if (w < 1) throw ConfigError(field + ".strategy.hidden widths must be >= 1");
        if (seller.kind == SellerKind::kAnalyticMyerson)
          throw ConfigError(field + ".strategy: the analytic seller cannot price a bid net");
      }
    }
    if (seller.groups < 1 || seller.pieces < 1)
      throw ConfigError("seller.groups and seller.pieces must be >= 1");
    if (!(seller.learning_rate >= 0.0)) throw ConfigError("seller.learning_rate must be >= 0");
    if (!(seller.softness.tau > 0.0) || !(seller.softness.kappa > 0.0))
      throw ConfigError("seller.softness temperatures must be > 0");
  }

  bool operator==(const EnvironmentConfig&) const = default;
};

struct RoundRecord {
  std::size_t round = 0;
  std::uint64_t theta_digest = 0;
  std::vector<double> summaries;                // alpha, or parameter norm for bid nets
  std::vector<std::uint64_t> strategy_digests;
  std::vector<double> utilities;
  std::vector<double> payments;
  double revenue = 0.0;
  double wall_seconds = 0.0;                    // excluded from exported CSVs
};

inline Strategy make_strategy(const StrategyInit& init, std::uint64_t seed) {
  switch (init.kind) {
    case StrategyKind::kTruthful: return Strategy::truthful();
    case StrategyKind::kLinear: return Strategy::linear(init.alpha);
    case StrategyKind::kAffine: return Strategy::affine(init.alpha, init.offset);
    case StrategyKind::kBidNet: return bidnet_init(init.hidden, seed);
  }
  return Strategy::truthful();
}

inline std::vector<std::optional<UniformSpec>> reported_distributions(
    std::span<const Strategy> strategies, std::span<const UniformSpec> specs) {
  std::vector<std::optional<UniformSpec>> out(strategies.size());
  for (std::size_t i = 0; i < strategies.size(); ++i)
    out[i] = reported_distribution(strategies[i], specs[i]);
  return out;
}

class Arena {
 public:
  explicit Arena(EnvironmentConfig config)
      : config_(validated(std::move(config))),
        seller_(config_.seller, config_.bidders.size(),
                derive_seed(config_.seed, {kSellerInitStream})) {
    for (std::size_t i = 0; i < config_.bidders.size(); ++i)
      strategies_.push_back(make_strategy(config_.bidders[i].strategy,
                                          derive_seed(config_.seed, {kStrategyInitStream, i})));
    refit_analytic_seller(0);
  }

  const EnvironmentConfig& config() const { return config_; }
  const std::vector<Strategy>& strategies() const { return strategies_; }
  const Seller& seller() const { return seller_; }
  std::size_t round() const { return round_; }
  bool finished() const { return round_ >= config_.rounds; }

  // Restore hooks used by checkpoints.
  void restore(std::size_t round, std::vector<Strategy> strategies, MechanismParams theta,
               std::size_t seller_iterations) {
    if (strategies.size() != strategies_.size())
      throw InputError("checkpoint has the wrong number of bidders");
    for (std::size_t i = 0; i < strategies.size(); ++i)
      if (strategies[i].kind() != strategies_[i].kind() ||
          !strategies[i].params().same_layout(strategies_[i].params()))
        throw InputError("checkpoint strategy " + std::to_string(i) +
                         " does not match the configured strategy");
    if (theta.bidders() != strategies_.size() ||
        theta.flat_size() != seller_.params().flat_size())
      throw InputError("checkpoint mechanism does not match the configured seller");
    round_ = round;
    strategies_ = std::move(strategies);
    seller_.set_params(std::move(theta));
    seller_.set_iterations(seller_iterations);
  }

  std::vector<UniformSpec> value_specs(std::size_t round) const {
    std::vector<UniformSpec> specs;
    for (const BidderConfig& b : config_.bidders) specs.push_back(b.values.at(round, config_.rounds));
    return specs;
  }

  RoundRecord run_round() {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t t = round_;
    try {
      RoundRecord rec = play(t);
      update_agents(t);
      ++round_;
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return rec;
    } catch (const NumericError& e) {
      throw NumericError("round " + std::to_string(t) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("round " + std::to_string(t) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("round " + std::to_string(t) + ": " + e.what());
    }
  }

  // Runs the remaining rounds; `on_round` sees every record as it is made.
  std::vector<RoundRecord> run(const std::function<void(const RoundRecord&)>& on_round = {}) {
    std::vector<RoundRecord> out;
    while (!finished()) {
      out.push_back(run_round());
      if (on_round) on_round(out.back());
    }
    return out;
  }

 private:
  static EnvironmentConfig validated(EnvironmentConfig c) {
    c.validate();
    return c;
  }

  RoundRecord play(std::size_t t) {
    const std::vector<UniformSpec> specs = value_specs(t);
    Rng rng(derive_seed(config_.seed, {kValuesStream, t}));
    values_ = sample_values(specs, config_.batch, rng);
    bids_ = hard_bids(strategies_, values_);
    RoundRecord rec;
    rec.round = t;
    rec.theta_digest = digest(seller_.params().flat());
    for (const Strategy& s : strategies_) {
      rec.summaries.push_back(s.summary());
      rec.strategy_digests.push_back(digest(s.params().values()));
    }
    const BatchResult r = evaluate_hard(strategies_, seller_, values_);
    rec.utilities = r.utility;
    rec.payments = r.payment;
    rec.revenue = r.revenue;
    if (!all_finite(rec.utilities) || !std::isfinite(rec.revenue))
      throw NumericError("non-finite utility or revenue");
    return rec;
  }

  void update_agents(std::size_t t) {
    const std::vector<UniformSpec> specs = value_specs(t);
    const MarketView view{strategies_, seller_, specs, config_.expose_opponent_params};
    std::vector<Strategy> next = strategies_;
    for (std::size_t i = 0; i < strategies_.size(); ++i) {
      const LearnerConfig& lc = config_.bidders[i].learner;
      if (lc.kind == LearnerKind::kStatic) continue;
      Rng rng(derive_seed(config_.seed, {kLearnerStream, i, t, lc.seed}));
      try {
        next[i] = learner_step(i, view, lc, rng, tape_);
      } catch (const NumericError& e) {
        throw NumericError("bidder " + std::to_string(i) + ": " + e.what());
      }
    }
    strategies_ = std::move(next);
    if (seller_.learns()) {
      seller_.update(bids_, tape_);
    } else {
      refit_analytic_seller(t + 1);
    }
  }

  void refit_analytic_seller(std::size_t next_round) {
    if (config_.seller.kind != SellerKind::kAnalyticMyerson) return;
    const std::vector<UniformSpec> specs = value_specs(std::min(next_round, config_.rounds));
    seller_.fit_reported(reported_distributions(strategies_, specs));
  }

  EnvironmentConfig config_;
  Seller seller_;
  std::vector<Strategy> strategies_;
  std::size_t round_ = 0;
  Matrix values_, bids_;
  Tape tape_;
};

inline std::vector<RoundRecord> run_experiment(const EnvironmentConfig& config) {
  Arena arena(config);
  return arena.run();
}

}  // namespace autobid
