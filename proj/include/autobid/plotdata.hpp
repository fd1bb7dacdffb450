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

// Plot-ready series from a trajectory CSV. Output schema (v1):
//
//   # autobid-plotdata v1
//   series,round,value
//
// Trajectory series are averaged over seeds and thinned to at most
// `max_points` rounds; reference lines are emitted as constant series over
// the same rounds.

#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "autobid/common.hpp"
#include "autobid/io.hpp"

namespace autobid {

inline constexpr const char* kPlotSchema = "# autobid-plotdata v1";

inline std::vector<std::pair<std::string, double>> reference_series(const std::string& kind) {
  if (kind == "fig1") return {{"truthful_myerson_revenue", 5.0 / 12.0}, {"second_price_revenue", 1.0 / 3.0}};
  if (kind == "fig4") return {{"truthful_utility", 1.0 / 12.0}, {"truthful_revenue", 5.0 / 12.0}};
  if (kind == "fig5") return {{"truth", 1.0}, {"equilibrium", 5.0 / 14.0}};
  if (kind == "fig6") return {{"truthful_utility", 1.0 / 12.0}, {"equilibrium_utility", 73.0 / 336.0}};
  throw ConfigError("unknown plot kind '" + kind + "' (expected fig1, fig4, fig5 or fig6)");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string emit_plot_data(const std::string& csv, const std::string& kind,
                                  std::size_t max_points = 200) {
  const auto refs = reference_series(kind);
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectorySchema)
    throw InputError("not a trajectory CSV: first line must be '" + std::string(kTrajectorySchema) + "'");
  const std::string expected =
      "preset,seed,round,agent,strategy_summary,utility,payment,revenue,theta_digest";
  if (!std::getline(in, line) || line != expected)
    throw InputError("trajectory columns do not match schema v1");

  // round -> series -> (sum, count)
  std::map<std::size_t, std::map<std::string, std::pair<double, std::size_t>>> acc;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 9) throw InputError("line " + std::to_string(line_no) + ": expected 9 columns");
    try {
      const std::size_t round = std::stoul(cells[2]);
      const std::string agent = "agent" + cells[3];
      auto& row = acc[round];
      auto add = [&](const std::string& name, const std::string& v) {
        auto& [sum, count] = row[name];
        sum += std::stod(v);
        ++count;
      };
      add(agent + ".strategy_summary", cells[4]);
      add(agent + ".utility", cells[5]);
      if (cells[3] == "0") add("revenue", cells[7]);
    } catch (const std::logic_error&) {
      throw InputError("line " + std::to_string(line_no) + ": malformed number");
    }
  }

  std::string out = std::string(kPlotSchema) + "\nseries,round,value\n";
  if (acc.empty()) return out;
  const std::size_t stride =
      std::max<std::size_t>(1, (acc.size() + max_points - 1) / std::max<std::size_t>(1, max_points));
  std::vector<std::size_t> rounds;
  std::size_t k = 0;
  for (const auto& [round, _] : acc) {
    if (k % stride == 0 || k + 1 == acc.size()) rounds.push_back(round);
    ++k;
  }
  std::map<std::string, std::vector<std::pair<std::size_t, double>>> series;
  for (std::size_t r : rounds)
    for (const auto& [name, sc] : acc.at(r))
      series[name].emplace_back(r, sc.first / static_cast<double>(sc.second));
  for (const auto& [name, pts] : series)
    for (const auto& [r, v] : pts) out += name + "," + std::to_string(r) + "," + fmt_double(v) + "\n";
  for (const auto& [name, v] : refs)
    for (std::size_t r : rounds) out += name + "," + std::to_string(r) + "," + fmt_double(v) + "\n";
  return out;
}

}  // namespace autobid
