// Copyright 2026 The mfbo-falsify Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// mfbo: falsification experiments from the command line.
//
//   mfbo run --case cartpole --method mfbo --iters 30 --seeds 15 --out out/
//   mfbo compare --case mountaincar --iters 25 --seeds 15 --out out/
//   mfbo report --out out/
//   mfbo print-config [--config file.json]
//
// Exit status: 0 ok, 2 configuration error, 1 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mfbo/config.hpp"
#include "mfbo/errors.hpp"
#include "mfbo/harness.hpp"
#include "mfbo/report.hpp"

namespace {

using namespace mfbo;

struct Flags {
  std::string config;
  std::optional<std::string> case_name, scenario, method, out;
  std::optional<int> iters, seeds, init_low, init_high, grid, mc, fantasies, threads, refit;
  std::optional<double> cost_low, cost_high;
};

void add_experiment_flags(CLI::App* app, Flags& f, bool with_method) {
  app->add_option("--config", f.config, "JSON config file (flags override it)");
  app->add_option("--case", f.case_name, "cartpole | mountaincar | lander");
  app->add_option("--scenario", f.scenario, "noise | rounding (low-fidelity degradation)");
  if (with_method) app->add_option("--method", f.method, "mfbo | bo_hf | random");
  app->add_option("--iters", f.iters, "BO iterations (default: per case)");
  app->add_option("--seeds", f.seeds, "number of seeds (0..n-1)");
  app->add_option("--cost-low", f.cost_low, "cost of a low-fidelity query");
  app->add_option("--cost-high", f.cost_high, "cost of a high-fidelity query");
  app->add_option("--init-low", f.init_low, "initial low-fidelity design size");
  app->add_option("--init-high", f.init_high, "initial high-fidelity design size (nested)");
  app->add_option("--grid-size", f.grid, "representer grid points");
  app->add_option("--mc-samples", f.mc, "posterior samples per entropy estimate");
  app->add_option("--fantasies", f.fantasies, "fantasy observations per candidate");
  app->add_option("--refit-every", f.refit, "hyperparameter refit period");
  app->add_option("--threads", f.threads, "worker threads over seeds (0 = all cores)");
  app->add_option("--out", f.out, "output directory");
}

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = load_config_file(f.config, cfg);
  if (f.case_name) cfg.case_id = parse_case(*f.case_name);
  if (f.scenario) cfg.scenario.kind = parse_scenario(*f.scenario);
  if (f.method) cfg.method = parse_method(*f.method);
  if (f.iters) {
    if (*f.iters < 1) throw ConfigError("--iters must be >= 1");
    cfg.n_iterations = *f.iters;
  }
  if (f.seeds) cfg.n_seeds = *f.seeds;
  if (f.cost_low) cfg.cost_low = *f.cost_low;
  if (f.cost_high) cfg.cost_high = *f.cost_high;
  if (f.init_low) cfg.init_low = *f.init_low;
  if (f.init_high) cfg.init_high = *f.init_high;
  if (f.grid) cfg.budget.grid_size = *f.grid;
  if (f.mc) cfg.budget.n_mc = *f.mc;
  if (f.fantasies) cfg.budget.n_fantasy = *f.fantasies;
  if (f.refit) cfg.refit_every = *f.refit;
  if (f.threads) cfg.threads = *f.threads;
  if (f.out) cfg.out_dir = *f.out;
  cfg.validate();
  return cfg;
}

void print_comparison(const std::vector<MethodRun>& runs) {
  std::printf("%-8s %-12s %-9s %6s %8s %10s %8s %10s\n", "method", "case", "scenario", "seeds",
              "cex", "min_rho", "hf_frac", "cost");
  for (const auto& run : runs) {
    const MethodSummary s = summarize_method(run);
    std::printf("%-8s %-12s %-9s %6d %8d %10.4f %8.3f %10.1f\n",
                std::string(to_string(s.method)).c_str(), std::string(to_string(s.case_id)).c_str(),
                std::string(to_string(s.scenario)).c_str(), s.n_seeds, s.total_cex,
                s.mean_min_rho_hf, s.mean_hf_fraction, s.mean_total_cost);
    if (s.n_failed > 0) std::printf("  (%d failed seeds, see failures.csv)\n", s.n_failed);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity Bayesian optimization for falsification"};
  app.require_subcommand(1);
  Flags run_flags, cmp_flags, cfg_flags;
  std::string report_dir = "out";

  auto* run = app.add_subcommand("run", "run one method over all seeds");
  add_experiment_flags(run, run_flags, true);
  auto* cmp = app.add_subcommand("compare", "run mfbo, bo_hf and random on one case");
  add_experiment_flags(cmp, cmp_flags, false);
  auto* rep = app.add_subcommand("report", "re-aggregate an existing output directory");
  rep->add_option("--out", report_dir, "output directory holding records.csv");
  auto* pc = app.add_subcommand("print-config", "print the resolved configuration as JSON");
  add_experiment_flags(pc, cfg_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      const ExperimentConfig cfg = resolve(run_flags);
      std::vector<MethodRun> runs{{cfg, run_experiment(cfg)}};
      write_outputs(cfg.out_dir, runs);
      print_comparison(runs);
    } else if (cmp->parsed()) {
      const ExperimentConfig base = resolve(cmp_flags);
      std::vector<MethodRun> runs;
      for (Method m : {Method::kMfbo, Method::kBoHf, Method::kRandom}) {
        ExperimentConfig cfg = base;
        cfg.method = m;
        runs.push_back({cfg, run_experiment(cfg)});
      }
      write_outputs(base.out_dir, runs);
      print_comparison(runs);
    } else if (rep->parsed()) {
      const auto runs = load_outputs(report_dir);
      write_outputs(report_dir, runs);
      print_comparison(runs);
    } else if (pc->parsed()) {
      std::cout << config_to_json(resolve(cfg_flags)).dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
