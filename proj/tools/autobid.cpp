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

// autobid command-line driver.
//
//   autobid run <config.json> [--out DIR] [--label NAME] [--resume CKPT]
//   autobid preset <id> [--seed N] [--out DIR] [--variant V]
//   autobid oracle analytic [--samples N] [--seed N]
//   autobid oracle grid [--step H] [--samples N] [--seed N] [--out DIR]
//   autobid plotdata <trajectory.csv> --kind {fig1|fig4|fig5|fig6} [--out FILE]
//   autobid list
//
// Exit status: 0 success, 2 usage or configuration error, 3 bad input file,
// 4 numeric failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "autobid/analysis.hpp"
#include "autobid/arena.hpp"
#include "autobid/io.hpp"
#include "autobid/plotdata.hpp"
#include "autobid/presets.hpp"

namespace fs = std::filesystem;
using namespace autobid;

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

// Runs one arena to completion and writes <label>.{config.json,
// trajectory.csv, summary.csv, checkpoint.json} under `out`.
void run_and_export(Arena arena, const std::string& preset, const std::string& label,
                    std::size_t window, const std::string& out) {
  fs::create_directories(out);
  const EnvironmentConfig& cfg = arena.config();
  write_text_file(join_path(out, label + ".config.json"), dump_config(cfg));
  std::ofstream traj(join_path(out, label + ".trajectory.csv"), std::ios::binary);
  if (!traj) throw ConfigError("cannot write into '" + out + "'");
  traj << trajectory_header();
  std::vector<RoundRecord> records;
  const std::size_t total = cfg.rounds;
  arena.run([&](const RoundRecord& r) {
    traj << trajectory_rows(preset, cfg.seed, r);
    records.push_back(r);
    if ((r.round + 1) % 50 == 0 || r.round + 1 == total) {
      std::fprintf(stderr, "[%s] round %zu/%zu revenue %.4f utility0 %.4f\n", label.c_str(),
                   r.round + 1, total, r.revenue, r.utilities.empty() ? 0.0 : r.utilities[0]);
    }
  });
  traj.close();
  const auto rows = summarize(cfg, records, window);
  write_text_file(join_path(out, label + ".summary.csv"), summary_csv(preset, cfg.seed, window, rows));
  write_text_file(join_path(out, label + ".checkpoint.json"), dump_checkpoint(arena));
  for (const AgentSummary& s : rows)
    std::printf("%s seed=%llu agent=%zu %s/%s mean_strategy=%.4f mean_utility=%.4f mean_revenue=%.4f\n",
                label.c_str(), static_cast<unsigned long long>(cfg.seed), s.agent,
                s.strategy.c_str(), s.learner.c_str(), s.mean_summary, s.mean_utility,
                s.mean_revenue);

  if (preset == "fig1") {
    // Learned virtual value against the analytic 2v - 1.
    std::string csv = "# autobid-virtual-value v1\nbid,bidder,learned,truth\n";
    const MechanismParams& m = arena.seller().params();
    for (std::size_t i = 0; i < m.bidders(); ++i)
      for (int k = 0; k <= 100; ++k) {
        const double b = k / 100.0;
        csv += fmt_double(b) + "," + std::to_string(i) + "," + fmt_double(m.nets[i](b)) + "," +
               fmt_double(2.0 * b - 1.0) + "\n";
      }
    write_text_file(join_path(out, label + ".virtual_value.csv"), csv);
  }
}

int cmd_run(const std::string& path, const std::string& out, std::string label,
            const std::string& resume) {
  if (label.empty()) label = fs::path(path).stem().string();
  if (!resume.empty()) {
    Arena arena = restore_checkpoint(read_text_file(resume), resume);
    if (!(arena.config() == load_config(path)))
      throw ConfigError("checkpoint '" + resume + "' was written for a different config");
    run_and_export(std::move(arena), label, label, kSummaryWindow, out);
  } else {
    run_and_export(Arena(load_config(path)), label, label, kSummaryWindow, out);
  }
  return 0;
}

int cmd_preset(const std::string& id, std::uint64_t seed, const std::string& out,
               const std::string& variant) {
  const Preset p = resolve_preset(id, seed, variant);
  for (const PresetRun& r : p.runs) run_and_export(Arena(r.config), id, r.label, p.window, out);
  return 0;
}

int cmd_oracle_analytic(std::size_t samples, std::uint64_t seed) {
  const std::vector<UniformSpec> specs(2);
  const std::vector<Strategy> truthful{Strategy::truthful(), Strategy::truthful()};
  const Seller myerson = analytic_seller(reported_distributions(truthful, specs));
  const auto m = mc_utility(truthful, myerson, specs, samples, seed);
  std::printf("truthful, analytic Myerson: utility (%.5f +- %.5f, %.5f +- %.5f) revenue %.5f +- %.5f"
              "   [1/12 = %.5f, 5/12 = %.5f]\n",
              m.utility[0], m.utility_se[0], m.utility[1], m.utility_se[1], m.revenue,
              m.revenue_se, 1.0 / 12.0, 5.0 / 12.0);
  SellerConfig sp;
  sp.kind = SellerKind::kSecondPrice;
  const auto s = mc_utility(truthful, Seller(sp, 2, 0), specs, samples, seed);
  std::printf("truthful, second price:     revenue %.5f +- %.5f   [1/3 = %.5f]\n", s.revenue,
              s.revenue_se, 1.0 / 3.0);
  const std::vector<Strategy> affine{Strategy::affine(0.25, 0.25), Strategy::affine(0.25, 0.25)};
  const Seller fitted = analytic_seller(reported_distributions(affine, specs));
  const auto a = mc_utility(affine, fitted, specs, samples, seed);
  std::printf("(v+1)/4 bids, fitted Myerson: utility (%.5f, %.5f)   [1/6 = %.5f]\n", a.utility[0],
              a.utility[1], 1.0 / 6.0);
  const auto lin = induced_utility(5.0 / 14.0, 5.0 / 14.0, samples, seed);
  std::printf("5/14 shading, fitted Myerson: utility (%.5f, %.5f)   [73/336 = %.5f]\n", lin.first,
              lin.second, 73.0 / 336.0);
  return 0;
}

int cmd_oracle_grid(double h, std::size_t samples, std::uint64_t seed, const std::string& out) {
  const InducedGameGrid g = induced_game_grid(alpha_grid(0.05, 1.5, h), samples, seed);
  const double starts[][2] = {{1.0, 1.0}, {0.1, 1.4}, {1.5, 0.05}};
  for (const auto& s : starts) {
    const auto r = grid_best_response_dynamics(g, s[0], s[1], 1000);
    std::printf("start (%.3f, %.3f): %s after %zu iterations at (%.4f, %.4f)   [5/14 = %.4f]\n",
                s[0], s[1], r.converged ? "fixed point" : "no fixed point", r.iterations,
                g.alphas[r.alpha1], g.alphas[r.alpha2], 5.0 / 14.0);
    if (!r.cycle.empty()) std::printf("  cycle of length %zu\n", r.cycle.size());
  }
  if (!out.empty()) {
    fs::create_directories(out);
    std::string csv = "# autobid-induced-game v1\nalpha1,alpha2,utility1,utility2\n";
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j)
        csv += fmt_double(g.alphas[i]) + "," + fmt_double(g.alphas[j]) + "," +
               fmt_double(g.u1(i, j)) + "," + fmt_double(g.u2(i, j)) + "\n";
    write_text_file(join_path(out, "induced_game.csv"), csv);
  }
  return 0;
}

int cmd_plotdata(const std::string& csv, const std::string& kind, const std::string& out) {
  const std::string text = emit_plot_data(read_text_file(csv), kind);
  if (out.empty()) std::cout << text;
  else write_text_file(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated-auction simulator: learned Myerson seller and strategic bidders"};
  app.require_subcommand(1);

  std::string config_path, out = "results", label, resume;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", out, "Output directory");
  run->add_option("--label", label, "File stem for outputs (default: config stem)");
  run->add_option("--resume", resume, "Checkpoint to resume from");

  std::string preset_id, variant;
  std::uint64_t seed = kDefaultPresetSeed;
  auto* preset = app.add_subcommand("preset", "Run a named experiment");
  preset->add_option("id", preset_id, "Preset id (see 'autobid list')")->required();
  preset->add_option("--seed", seed, "Master seed");
  preset->add_option("--out", out, "Output directory");
  preset->add_option("--variant", variant, "Table row variant, or 'all'");

  std::string oracle_kind;
  std::size_t samples = 0;
  double h = 0.005;
  std::uint64_t oracle_seed = 7;
  std::string oracle_out;
  auto* oracle = app.add_subcommand("oracle", "Closed-form and brute-force reference values");
  oracle->add_option("kind", oracle_kind, "analytic or grid")
      ->required()
      ->check(CLI::IsMember({"analytic", "grid"}));
  oracle->add_option("--samples", samples, "Monte Carlo samples");
  oracle->add_option("--seed", oracle_seed, "Sampling seed");
  oracle->add_option("--step", h, "Grid resolution (grid only)");
  oracle->add_option("--out", oracle_out, "Directory for the utility matrix CSV (grid only)");

  std::string csv_path, kind, plot_out;
  auto* plot = app.add_subcommand("plotdata", "Plot-ready series from a trajectory CSV");
  plot->add_option("csv", csv_path, "Trajectory CSV")->required();
  plot->add_option("--kind", kind, "fig1, fig4, fig5 or fig6")->required();
  plot->add_option("--out", plot_out, "Output file (default: stdout)");

  auto* list = app.add_subcommand("list", "List preset ids and table variants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, out, label, resume);
    if (*preset) return cmd_preset(preset_id, seed, out, variant);
    if (*oracle) {
      if (oracle_kind == "analytic") return cmd_oracle_analytic(samples ? samples : 1000000, oracle_seed);
      return cmd_oracle_grid(h, samples ? samples : 100000, oracle_seed, oracle_out);
    }
    if (*plot) return cmd_plotdata(csv_path, kind, plot_out);
    if (*list) {
      for (const auto& id : preset_ids()) std::printf("%s\n", id.c_str());
      std::printf("variants for t1_*:");
      for (const auto& v : table_variants()) std::printf(" %s", v.c_str());
      std::printf(" all\n");
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  }
  return 2;
}
