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

// Text formats: JSON experiment configs, JSON checkpoints, and versioned
// CSV exports. Doubles are written in shortest round-trip form, so a
// checkpoint restores every parameter bit for bit.

#pragma once

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autobid/arena.hpp"

namespace autobid {

using json = nlohmann::json;

inline constexpr const char* kConfigFormat = "autobid-config/1";
inline constexpr const char* kCheckpointFormat = "autobid-checkpoint/1";
inline constexpr const char* kTrajectorySchema = "# autobid-trajectory v1";
inline constexpr const char* kSummarySchema = "# autobid-summary v1";

// ---------------------------------------------------------------------------
// Enum names.

inline SellerKind seller_kind_from(const std::string& s, const std::string& field) {
  if (s == "myerson_net") return SellerKind::kMyersonNet;
  if (s == "first_price") return SellerKind::kFirstPrice;
  if (s == "second_price") return SellerKind::kSecondPrice;
  if (s == "analytic_myerson") return SellerKind::kAnalyticMyerson;
  throw ConfigError(field + ": unknown seller kind '" + s + "'");
}

inline std::string to_string(SellerKind k) {
  switch (k) {
    case SellerKind::kMyersonNet: return "myerson_net";
    case SellerKind::kFirstPrice: return "first_price";
    case SellerKind::kSecondPrice: return "second_price";
    case SellerKind::kAnalyticMyerson: return "analytic_myerson";
  }
  return "?";
}

inline StrategyKind strategy_kind_from(const std::string& s, const std::string& field) {
  if (s == "truthful") return StrategyKind::kTruthful;
  if (s == "linear") return StrategyKind::kLinear;
  if (s == "affine") return StrategyKind::kAffine;
  if (s == "bidnet") return StrategyKind::kBidNet;
  throw ConfigError(field + ": unknown strategy kind '" + s + "'");
}

inline LearnerKind learner_kind_from(const std::string& s, const std::string& field) {
  if (s == "static") return LearnerKind::kStatic;
  if (s == "naive") return LearnerKind::kNaive;
  if (s == "lola") return LearnerKind::kLola;
  if (s == "pg") return LearnerKind::kPg;
  throw ConfigError(field + ": unknown learner kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Strict object reader: every key must be consumed, types are checked, and
// errors carry the dotted field path.

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    out = convert<T>(*it, field(key));
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key().c_str()) + ": unknown key");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  template <class T>
  static T convert(const json& v, const std::string& f) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(f + " must be a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(f + " must be a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) throw ConfigError(f + " must be a nonnegative integer");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(f + " must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      if (!v.is_array()) throw ConfigError(f + " must be an array");
      T out;
      for (std::size_t k = 0; k < v.size(); ++k)
        out.push_back(convert<std::size_t>(v[k], f + "[" + std::to_string(k) + "]"));
      return out;
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Config <-> JSON.

inline json to_json(const LearnerConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"learning_rate", c.learning_rate},
          {"lookahead_rate", c.lookahead_rate},
          {"inner_steps", c.inner_steps},
          {"directions", c.directions},
          {"direction_memory", c.direction_memory},
          {"similarity_bound", c.similarity_bound},
          {"step_bound", c.step_bound},
          {"discount", c.discount},
          {"batch", c.batch},
          {"inner_batch", c.inner_batch},
          {"inner_pool", c.inner_pool},
          {"tau", c.tau},
          {"kappa", c.kappa},
          {"fd_step", c.fd_step},
          {"seed", c.seed}};
}

inline json to_json(const EnvironmentConfig& c) {
  json bidders = json::array();
  for (const BidderConfig& b : c.bidders) {
    bidders.push_back({{"values",
                        {{"lo", b.values.base.lo},
                         {"hi", b.values.base.hi},
                         {"scheduled", b.values.scheduled}}},
                       {"strategy",
                        {{"kind", to_string(b.strategy.kind)},
                         {"alpha", b.strategy.alpha},
                         {"offset", b.strategy.offset},
                         {"hidden", b.strategy.hidden}}},
                       {"learner", to_json(b.learner)}});
  }
  const Softness& s = c.seller.softness;
  return {{"format", kConfigFormat},
          {"rounds", c.rounds},
          {"batch", c.batch},
          {"seed", c.seed},
          {"expose_opponent_params", c.expose_opponent_params},
          {"seller",
           {{"kind", to_string(c.seller.kind)},
            {"groups", c.seller.groups},
            {"pieces", c.seller.pieces},
            {"learning_rate", c.seller.learning_rate},
            {"reserve", c.seller.reserve},
            {"init_std", c.seller.init_std},
            {"softness",
             {{"tau", s.tau},
              {"kappa", s.kappa},
              {"anneal_every", s.anneal_every},
              {"anneal_factor", s.anneal_factor},
              {"floor", s.floor}}}}},
          {"bidders", bidders}};
}

inline LearnerConfig learner_from_json(const json& j, const std::string& path) {
  LearnerConfig c;
  ObjectReader r(j, path);
  std::string kind = to_string(c.kind);
  r.read("kind", kind);
  c.kind = learner_kind_from(kind, r.field("kind"));
  r.read("learning_rate", c.learning_rate);
  r.read("lookahead_rate", c.lookahead_rate);
  r.read("inner_steps", c.inner_steps);
  r.read("directions", c.directions);
  r.read("direction_memory", c.direction_memory);
  r.read("similarity_bound", c.similarity_bound);
  r.read("step_bound", c.step_bound);
  r.read("discount", c.discount);
  r.read("batch", c.batch);
  r.read("inner_batch", c.inner_batch);
  r.read("inner_pool", c.inner_pool);
  r.read("tau", c.tau);
  r.read("kappa", c.kappa);
  r.read("fd_step", c.fd_step);
  r.read("seed", c.seed);
  r.finish();
  return c;
}

inline EnvironmentConfig config_from_json(const json& j) {
  EnvironmentConfig c;
  ObjectReader r(j, "");
  std::string format = kConfigFormat;
  r.read("format", format);
  if (format != kConfigFormat)
    throw ConfigError("format: expected '" + std::string(kConfigFormat) + "', got '" + format + "'");
  r.read("rounds", c.rounds);
  r.read("batch", c.batch);
  r.read("seed", c.seed);
  r.read("expose_opponent_params", c.expose_opponent_params);
  if (const json* s = r.child("seller")) {
    ObjectReader sr(*s, "seller");
    std::string kind = to_string(c.seller.kind);
    sr.read("kind", kind);
    c.seller.kind = seller_kind_from(kind, "seller.kind");
    sr.read("groups", c.seller.groups);
    sr.read("pieces", c.seller.pieces);
    sr.read("learning_rate", c.seller.learning_rate);
    sr.read("reserve", c.seller.reserve);
    sr.read("init_std", c.seller.init_std);
    if (const json* soft = sr.child("softness")) {
      ObjectReader so(*soft, "seller.softness");
      so.read("tau", c.seller.softness.tau);
      so.read("kappa", c.seller.softness.kappa);
      so.read("anneal_every", c.seller.softness.anneal_every);
      so.read("anneal_factor", c.seller.softness.anneal_factor);
      so.read("floor", c.seller.softness.floor);
      so.finish();
    }
    sr.finish();
  }
  const json* bidders = r.child("bidders");
  if (!bidders || !bidders->is_array()) throw ConfigError("bidders: required array");
  for (std::size_t i = 0; i < bidders->size(); ++i) {
    const std::string path = "bidders[" + std::to_string(i) + "]";
    BidderConfig b;
    ObjectReader br((*bidders)[i], path);
    if (const json* v = br.child("values")) {
      ObjectReader vr(*v, path + ".values");
      vr.read("lo", b.values.base.lo);
      vr.read("hi", b.values.base.hi);
      vr.read("scheduled", b.values.scheduled);
      vr.finish();
    }
    if (const json* s = br.child("strategy")) {
      ObjectReader sr(*s, path + ".strategy");
      std::string kind = to_string(b.strategy.kind);
      sr.read("kind", kind);
      b.strategy.kind = strategy_kind_from(kind, path + ".strategy.kind");
      sr.read("alpha", b.strategy.alpha);
      sr.read("offset", b.strategy.offset);
      sr.read("hidden", b.strategy.hidden);
      sr.finish();
    }
    if (const json* l = br.child("learner")) b.learner = learner_from_json(*l, path + ".learner");
    br.finish();
    c.bidders.push_back(b);
  }
  r.finish();
  c.validate();
  return c;
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number.
    std::size_t line = 1;
    for (std::size_t k = 0; k < std::min<std::size_t>(e.byte, text.size()); ++k)
      if (text[k] == '\n') ++line;
    throw ConfigError(source + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline EnvironmentConfig load_config(const std::string& path) {
  return config_from_json(parse_json_text(read_text_file(path), path));
}

inline std::string dump_config(const EnvironmentConfig& c) { return to_json(c).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Checkpoints.

inline json segments_to_json(const ParamVector& p) {
  json segs = json::array();
  for (const Segment& s : p.segments()) {
    auto v = p.segment(s.name);
    segs.push_back({{"name", s.name},
                    {"shape", s.shape},
                    {"values", std::vector<double>(v.begin(), v.end())}});
  }
  return segs;
}

inline ParamVector segments_from_json(const json& segs, const std::string& path) {
  if (!segs.is_array()) throw InputError(path + " must be an array");
  ParamVector p;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const json& s = segs[k];
    const std::string f = path + "[" + std::to_string(k) + "]";
    if (!s.is_object() || !s.contains("name") || !s.contains("shape") || !s.contains("values"))
      throw InputError(f + " needs name, shape and values");
    const auto shape = s["shape"].get<std::vector<std::size_t>>();
    const auto values = s["values"].get<std::vector<double>>();
    auto dst = p.add_segment(s["name"].get<std::string>(), shape);
    if (dst.size() != values.size()) throw InputError(f + ": shape and value count disagree");
    std::copy(values.begin(), values.end(), dst.begin());
  }
  return p;
}

// Mechanism layout: bidder<i>.log_slope [J, K], bidder<i>.intercept [J, K].
inline ParamVector mechanism_to_params(const MechanismParams& m) {
  ParamVector p;
  for (std::size_t i = 0; i < m.bidders(); ++i) {
    const VirtualValueNet& net = m.nets[i];
    const std::vector<std::size_t> shape{net.groups(), net.pieces()};
    auto g = p.add_segment("bidder" + std::to_string(i) + ".log_slope", shape);
    std::copy(net.log_slope().begin(), net.log_slope().end(), g.begin());
    auto b = p.add_segment("bidder" + std::to_string(i) + ".intercept", shape);
    std::copy(net.intercept().begin(), net.intercept().end(), b.begin());
  }
  return p;
}

inline MechanismParams mechanism_from_params(const ParamVector& p, double reserve) {
  MechanismParams m;
  m.reserve = reserve;
  for (std::size_t i = 0;; ++i) {
    const std::string prefix = "bidder" + std::to_string(i);
    if (!p.has_segment(prefix + ".log_slope")) break;
    const Segment& info = p.info(prefix + ".log_slope");
    if (info.shape.size() != 2) throw InputError(prefix + ".log_slope must be 2-D");
    VirtualValueNet net(info.shape[0], info.shape[1]);
    net.assign(p.segment(prefix + ".log_slope"), p.segment(prefix + ".intercept"));
    m.nets.push_back(std::move(net));
  }
  if (m.nets.empty()) throw InputError("checkpoint mechanism has no bidders");
  return m;
}

inline json checkpoint_json(const Arena& arena) {
  json strategies = json::array();
  for (const Strategy& s : arena.strategies())
    strategies.push_back({{"kind", to_string(s.kind())}, {"segments", segments_to_json(s.params())}});
  const MechanismParams& m = arena.seller().params();
  return {{"format", kCheckpointFormat},
          {"round", arena.round()},
          {"config", to_json(arena.config())},
          {"seller",
           {{"iterations", arena.seller().iterations()},
            {"reserve", m.reserve},
            {"segments", segments_to_json(mechanism_to_params(m))}}},
          {"strategies", strategies}};
}

inline std::string dump_checkpoint(const Arena& arena) { return checkpoint_json(arena).dump(1) + "\n"; }

inline Strategy strategy_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("segments"))
    throw InputError(path + " needs kind and segments");
  const StrategyKind kind = strategy_kind_from(j["kind"].get<std::string>(), path + ".kind");
  ParamVector p = segments_from_json(j["segments"], path + ".segments");
  switch (kind) {
    case StrategyKind::kTruthful: return Strategy::truthful();
    case StrategyKind::kLinear: return Strategy::linear(p.segment("alpha")[0]);
    case StrategyKind::kAffine:
      return Strategy::affine(p.segment("alpha")[0], p.segment("offset")[0]);
    case StrategyKind::kBidNet: return Strategy::bidnet(std::move(p));
  }
  return Strategy::truthful();
}

inline Arena restore_checkpoint_json(const json& j, const std::string& source);

inline Arena restore_checkpoint(const std::string& text, const std::string& source = "checkpoint") {
  const json j = parse_json_text(text, source);
  try {
    return restore_checkpoint_json(j, source);
  } catch (const json::exception& e) {
    throw InputError(source + ": malformed checkpoint: " + e.what());
  }
}

inline Arena restore_checkpoint_json(const json& j, const std::string& source) {
  if (!j.is_object() || j.value("format", std::string()) != kCheckpointFormat)
    throw InputError(source + ": not an " + std::string(kCheckpointFormat) + " document");
  Arena arena(config_from_json(j.at("config")));
  std::vector<Strategy> strategies;
  const json& sj = j.at("strategies");
  for (std::size_t i = 0; i < sj.size(); ++i)
    strategies.push_back(strategy_from_json(sj[i], "strategies[" + std::to_string(i) + "]"));
  const json& seller = j.at("seller");
  MechanismParams theta = mechanism_from_params(
      segments_from_json(seller.at("segments"), "seller.segments"), seller.at("reserve").get<double>());
  arena.restore(j.at("round").get<std::size_t>(), std::move(strategies), std::move(theta),
                seller.at("iterations").get<std::size_t>());
  return arena;
}

// ---------------------------------------------------------------------------
// CSV.

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string trajectory_header() {
  return std::string(kTrajectorySchema) +
         "\npreset,seed,round,agent,strategy_summary,utility,payment,revenue,theta_digest\n";
}

inline std::string trajectory_rows(const std::string& preset, std::uint64_t seed,
                                   const RoundRecord& r) {
  std::string out;
  char digest_buf[24];
  std::snprintf(digest_buf, sizeof digest_buf, "%016llx",
                static_cast<unsigned long long>(r.theta_digest));
  for (std::size_t i = 0; i < r.utilities.size(); ++i) {
    out += preset + "," + std::to_string(seed) + "," + std::to_string(r.round) + "," +
           std::to_string(i) + "," + fmt_double(r.summaries[i]) + "," +
           fmt_double(r.utilities[i]) + "," + fmt_double(r.payments[i]) + "," +
           fmt_double(r.revenue) + "," + digest_buf + "\n";
  }
  return out;
}

struct AgentSummary {
  std::size_t agent = 0;
  std::string strategy, learner;
  double mean_summary = 0.0, mean_utility = 0.0, mean_revenue = 0.0;
};

// Means over the last `window` records.
inline std::vector<AgentSummary> summarize(const EnvironmentConfig& config,
                                           const std::vector<RoundRecord>& records,
                                           std::size_t window) {
  std::vector<AgentSummary> out;
  const std::size_t n = config.bidders.size();
  const std::size_t w = std::min(window, records.size());
  for (std::size_t i = 0; i < n; ++i) {
    AgentSummary s;
    s.agent = i;
    s.strategy = to_string(config.bidders[i].strategy.kind);
    s.learner = to_string(config.bidders[i].learner.kind);
    for (std::size_t k = records.size() - w; k < records.size(); ++k) {
      s.mean_summary += records[k].summaries[i];
      s.mean_utility += records[k].utilities[i];
      s.mean_revenue += records[k].revenue;
    }
    if (w > 0) {
      s.mean_summary /= static_cast<double>(w);
      s.mean_utility /= static_cast<double>(w);
      s.mean_revenue /= static_cast<double>(w);
    }
    out.push_back(s);
  }
  return out;
}

inline std::string summary_csv(const std::string& preset, std::uint64_t seed, std::size_t window,
                               const std::vector<AgentSummary>& rows) {
  std::string out = std::string(kSummarySchema) +
                    "\npreset,seed,agent,strategy,learner,window,mean_strategy_summary,"
                    "mean_utility,mean_revenue\n";
  for (const AgentSummary& s : rows)
    out += preset + "," + std::to_string(seed) + "," + std::to_string(s.agent) + "," +
           s.strategy + "," + s.learner + "," + std::to_string(window) + "," +
           fmt_double(s.mean_summary) + "," + fmt_double(s.mean_utility) + "," +
           fmt_double(s.mean_revenue) + "\n";
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace autobid
