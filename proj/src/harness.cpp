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

#include "mfbo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <thread>

#include "mfbo/errors.hpp"
#include "mfbo/gp.hpp"
#include "mfbo/mfgp.hpp"
#include "mfbo/random.hpp"

namespace mfbo {

namespace {

// Substream tags for derive_seed(seed, {tag, ...}).
enum : std::uint64_t { kDesign = 1, kAcquisition = 2, kSimulator = 3, kFinalGrid = 4, kRandom = 5 };

constexpr int kTop = 2;

class Evaluator {
 public:
  Evaluator(const ExperimentConfig& cfg, int seed)
      : cfg_(cfg), seed_(seed), system_(make_system(cfg.case_id, cfg.scenario)),
        spec_(cfg.safety_spec()) {}

  const EnvBox& box() const { return system_.box; }

  // Simulates `e` (raw) at `level` and appends a record.
  const RunRecord& evaluate(SeedResult& out, std::span<const double> e, int level, int iter,
                            int slot) {
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord r;
    r.method = cfg_.method;
    r.case_id = cfg_.case_id;
    r.scenario = cfg_.scenario.kind;
    r.seed = seed_;
    r.iter = iter;
    r.level = level;
    r.cost_lambda = level == kTop ? cfg_.cost_high : cfg_.cost_low;
    r.e.assign(e.begin(), e.end());
    const std::uint64_t run_seed =
        derive_seed(static_cast<std::uint64_t>(seed_),
                    {kSimulator, static_cast<std::uint64_t>(iter), static_cast<std::uint64_t>(slot),
                     static_cast<std::uint64_t>(level)});
    try {
      r.rho = robustness(spec_, simulate(system_, e, level, run_seed));
    } catch (const DivergedTrajectoryError& err) {
      if (err.partial().length() == 0) throw;
      r.rho = robustness(spec_, err.partial());
      r.diverged = true;
    }
    r.is_cex = level == kTop && r.rho < 0.0;
    cost_ += r.cost_lambda;
    r.cum_cost = cost_;
    r.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.records.push_back(std::move(r));
    return out.records.back();
  }

 private:
  const ExperimentConfig& cfg_;
  int seed_;
  ClosedLoopSystem system_;
  SafetySpec spec_;
  double cost_ = 0.0;
};

std::vector<double> row_vector(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) v[static_cast<std::size_t>(j)] = m(r, j);
  return v;
}

void record_model_minimum(SeedResult& out, const LatentModel& post, const ExperimentConfig& cfg,
                          const EnvBox& box, int seed) {
  const RepresenterGrid grid = make_grid(cfg.budget.grid_size, static_cast<int>(box.size()),
                                         derive_seed(static_cast<std::uint64_t>(seed), {kFinalGrid}));
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int j = 0; j < grid.size(); ++j) {
    const std::span<const double> u(grid.points.row(j).data(), static_cast<std::size_t>(grid.dim()));
    const double mu = post.predict(u, post.levels()).mean;
    if (mu < best) {
      best = mu;
      arg = j;
    }
  }
  out.gp_min_mean = best;
  out.gp_argmin_e = box.from_unit(std::span<const double>(grid.points.row(arg).data(),
                                                          static_cast<std::size_t>(grid.dim())));
}

template <class Fn>
void guarded(SeedResult& out, Fn&& fn) {
  try {
    fn();
  } catch (const SingularModelError& e) {
    out.failed = true;
    out.failure = e.what();
  } catch (const InsufficientDataError& e) {
    out.failed = true;
    out.failure = e.what();
  } catch (const std::runtime_error& e) {
    out.failed = true;
    out.failure = e.what();
  }
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kMfbo: return "mfbo";
    case Method::kBoHf: return "bo_hf";
    case Method::kRandom: return "random";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "mfbo") return Method::kMfbo;
  if (name == "bo_hf" || name == "bo") return Method::kBoHf;
  if (name == "random") return Method::kRandom;
  throw ConfigError("unknown method '" + std::string(name) + "' (mfbo, bo_hf, random)");
}

int default_iterations(CaseId c) {
  switch (c) {
    case CaseId::kCartPole: return 30;
    case CaseId::kMountainCar: return 25;
    case CaseId::kLander: return 35;
  }
  return 30;
}

void ExperimentConfig::validate() const {
  if (n_iterations < 0) throw ConfigError("iterations must be >= 1");
  if (n_seeds < 1) throw ConfigError("seeds must be >= 1");
  if (!(cost_low > 0.0) || !(cost_high > 0.0) || !std::isfinite(cost_high)) {
    throw ConfigError("costs must be positive and finite");
  }
  if (!(cost_low < cost_high)) throw ConfigError("costs must increase with fidelity (low < high)");
  if (init_high < 2) throw ConfigError("init high must be >= 2");
  if (init_low < init_high) throw ConfigError("init low must be >= init high (nested design)");
  if (budget.grid_size < 2) throw ConfigError("grid size must be >= 2");
  if (budget.n_mc < 2) throw ConfigError("mc samples must be >= 2");
  if (budget.n_fantasy < 1) throw ConfigError("fantasies must be >= 1");
  if (refit_every < 1) throw ConfigError("refit_every must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  try {
    scenario.validate();
    if (spec) spec->validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!scenario.noise_std.empty() &&
      static_cast<int>(scenario.noise_std.size()) != observation_size(case_id)) {
    throw ConfigError("noise_std needs one entry per observed signal");
  }
}

void summarize(SeedResult& r, int top_level) {
  r.n_cex = 0;
  r.min_rho_hf = std::numeric_limits<double>::infinity();
  r.best_hf_e.clear();
  int loop = 0;
  int loop_hf = 0;
  for (const auto& rec : r.records) {
    if (rec.is_cex) ++r.n_cex;
    if (rec.level == top_level && rec.rho < r.min_rho_hf) {
      r.min_rho_hf = rec.rho;
      r.best_hf_e = rec.e;
    }
    if (rec.iter >= 1) {
      ++loop;
      if (rec.level == top_level) ++loop_hf;
    }
  }
  r.hf_fraction = loop > 0 ? static_cast<double>(loop_hf) / loop : 0.0;
  r.total_cost = r.records.empty() ? 0.0 : r.records.back().cum_cost;
}

SeedResult run_mfbo(const ExperimentConfig& cfg, int seed) {
  cfg.validate();
  SeedResult out;
  out.method = Method::kMfbo;
  out.seed = seed;
  Evaluator ev(cfg, seed);
  const EnvBox& box = ev.box();
  const int d = static_cast<int>(box.size());
  const auto s = static_cast<std::uint64_t>(seed);

  guarded(out, [&] {
    Rng design_rng(derive_seed(s, {kDesign}));
    const Eigen::MatrixXd design = scrambled_sobol(cfg.init_low, d, design_rng);
    MFDataset data;
    data.levels.assign(2, Dataset(d));
    data.level_costs = {cfg.cost_low, cfg.cost_high};
    for (int i = 0; i < cfg.init_low; ++i) {
      const auto u = row_vector(design, i);
      data.levels[0].append(u, ev.evaluate(out, box.from_unit(u), 1, 0, i).rho);
    }
    for (int i = 0; i < cfg.init_high; ++i) {
      const auto u = row_vector(design, i);
      data.levels[1].append(u, ev.evaluate(out, box.from_unit(u), 2, 0, i).rho);
    }

    MFParams params = fit_mf_hyperparams(data);
    auto post = std::make_unique<MFGPPosterior>(data, params);
    const double costs[2] = {cfg.cost_low, cfg.cost_high};
    const int n = cfg.iterations();
    for (int t = 1; t <= n; ++t) {
      const auto tt = static_cast<std::uint64_t>(t);
      const RepresenterGrid grid = make_grid(cfg.budget.grid_size, d, derive_seed(s, {kAcquisition, tt, 0}));
      Rng acq_rng(derive_seed(s, {kAcquisition, tt, 1}));
      const AcquisitionDecision dec = select_next(*post, grid, costs, cfg.budget, acq_rng);
      const double rho = ev.evaluate(out, box.from_unit(dec.config), dec.level, t, 0).rho;
      data.levels[static_cast<std::size_t>(dec.level - 1)].append(dec.config, rho);
      if (t % cfg.refit_every == 0) params = fit_mf_hyperparams(data);
      post = std::make_unique<MFGPPosterior>(data, params);
    }
    record_model_minimum(out, *post, cfg, box, seed);
  });
  summarize(out);
  return out;
}

SeedResult run_single_fidelity_bo(const ExperimentConfig& cfg, int seed) {
  cfg.validate();
  SeedResult out;
  out.method = Method::kBoHf;
  out.seed = seed;
  Evaluator ev(cfg, seed);
  const EnvBox& box = ev.box();
  const int d = static_cast<int>(box.size());
  const auto s = static_cast<std::uint64_t>(seed);

  guarded(out, [&] {
    // Same quasi-random design as mfbo; only its high-fidelity part is run.
    Rng design_rng(derive_seed(s, {kDesign}));
    const Eigen::MatrixXd design = scrambled_sobol(cfg.init_low, d, design_rng);
    Dataset data(d);
    for (int i = 0; i < cfg.init_high; ++i) {
      const auto u = row_vector(design, i);
      data.append(u, ev.evaluate(out, box.from_unit(u), kTop, 0, i).rho);
    }
    KernelParams params = optimize_hyperparams(data);
    auto post = std::make_unique<GPPosterior>(data, params);
    const double costs[1] = {cfg.cost_high};
    const int n = cfg.iterations();
    for (int t = 1; t <= n; ++t) {
      const auto tt = static_cast<std::uint64_t>(t);
      const RepresenterGrid grid = make_grid(cfg.budget.grid_size, d, derive_seed(s, {kAcquisition, tt, 0}));
      Rng acq_rng(derive_seed(s, {kAcquisition, tt, 1}));
      const AcquisitionDecision dec = select_next(*post, grid, costs, cfg.budget, acq_rng);
      const double rho = ev.evaluate(out, box.from_unit(dec.config), kTop, t, 0).rho;
      data.append(dec.config, rho);
      if (t % cfg.refit_every == 0) params = optimize_hyperparams(data);
      post = std::make_unique<GPPosterior>(data, params);
    }
    record_model_minimum(out, *post, cfg, box, seed);
  });
  summarize(out);
  return out;
}

SeedResult run_random_search(const ExperimentConfig& cfg, int seed) {
  cfg.validate();
  SeedResult out;
  out.method = Method::kRandom;
  out.seed = seed;
  Evaluator ev(cfg, seed);
  guarded(out, [&] {
    Rng rng(derive_seed(static_cast<std::uint64_t>(seed), {kRandom}));
    const int n = cfg.iterations();
    for (int t = 1; t <= n; ++t) {
      const auto e = random_select(ev.box(), rng);
      ev.evaluate(out, e, kTop, t, 0);
    }
  });
  out.gp_min_mean = std::nan("");
  summarize(out);
  return out;
}

SeedResult run_seed(const ExperimentConfig& cfg, int seed) {
  switch (cfg.method) {
    case Method::kMfbo: return run_mfbo(cfg, seed);
    case Method::kBoHf: return run_single_fidelity_bo(cfg, seed);
    case Method::kRandom: return run_random_search(cfg, seed);
  }
  throw ContractViolation("unknown method");
}

std::vector<SeedResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<SeedResult> results(static_cast<std::size_t>(cfg.n_seeds));
  int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, cfg.n_seeds);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < cfg.n_seeds; i = next++) results[static_cast<std::size_t>(i)] = run_seed(cfg, i);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return results;
}

}  // namespace mfbo
