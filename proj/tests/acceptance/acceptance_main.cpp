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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../robustness_oracle.hpp"
#include "mfbo/acquisition.hpp"
#include "mfbo/harness.hpp"
#include "mfbo/mfgp.hpp"
#include "mfbo/report.hpp"

namespace mfbo {
namespace {

namespace fs = std::filesystem;

// Pinned tolerances and budgets.
constexpr double kOracleTol = 1e-8;
constexpr double kPooledTol = 1e-6;
constexpr double kGapOnlyTol = 1e-10;
constexpr double kZeroGainTol = 1e-6;
constexpr double kOracleSeconds = 5.0;
constexpr int kGpDatasets = 50;
constexpr int kMfDesigns = 20;
constexpr int kSpecPairs = 500;
constexpr int kEntropyMc = 4096;
constexpr int kEntropyGrid = 8;
constexpr int kEntropyReplicates = 40;
constexpr int kSeeds = 15;
constexpr double kHfFractionNoise = 0.95;
constexpr double kHfFractionRounding = 0.97;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

KernelParams random_params(int d, Rng& rng) {
  std::uniform_real_distribution<double> u;
  KernelParams p;
  p.signal_variance = 0.2 + 2.0 * u(rng);
  for (int j = 0; j < d; ++j) p.lengthscales.push_back(0.2 + u(rng));
  p.noise_variance = std::pow(10.0, -4.0 + 3.0 * u(rng));
  return p;
}

RowMatrix uniform_rows(int n, int d, Rng& rng) {
  std::uniform_real_distribution<double> u;
  RowMatrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

std::span<const double> row(const RowMatrix& m, int i) {
  return {m.row(i).data(), static_cast<std::size_t>(m.cols())};
}

// ---- 1 ----
void gp_oracle() {
  Rng rng(derive_seed(1, {1}));
  std::normal_distribution<double> nd;
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int rep = 0; rep < kGpDatasets; ++rep) {
    const int d = 1 + rep % 7;
    const int n = 1 + static_cast<int>(rng() % 20);
    Dataset data(d);
    const auto x = uniform_rows(n, d, rng);
    for (int i = 0; i < n; ++i) data.append(row(x, i), nd(rng));
    const KernelParams p = random_params(d, rng);
    const GPPosterior post(data, p);
    Eigen::MatrixXd k = kernel_matrix(data.configs, p);
    k.diagonal().array() += p.noise_variance;
    const Eigen::MatrixXd kinv = k.inverse();
    const auto probes = uniform_rows(10, d, rng);
    const Eigen::MatrixXd ks = cross_kernel(probes, data.configs, p);
    for (int i = 0; i < probes.rows(); ++i) {
      const Prediction got = post.mean_var(row(probes, i));
      const double mean = ks.row(i).dot(kinv * data.observations);
      const double var = std::max(0.0, p.signal_variance - ks.row(i).dot(kinv * ks.row(i).transpose()));
      worst = std::max({worst, std::fabs(got.mean - mean), std::fabs(got.variance - var)});
    }
  }
  const double secs = seconds_since(t0);
  report(1, worst <= kOracleTol && secs < kOracleSeconds,
         "max |diff| " + fmt("%.3g", worst) + " over " + std::to_string(kGpDatasets) +
             " datasets, " + fmt("%.3f s", secs));
}

// ---- 2 ----
Prediction dense_mf_oracle(const MFDataset& data, const MFParams& p, std::span<const double> e,
                           int level) {
  std::vector<std::vector<double>> xs;
  std::vector<int> ls;
  std::vector<double> ys;
  for (int l = 0; l < data.num_levels(); ++l) {
    const auto& d = data.levels[static_cast<std::size_t>(l)];
    for (int i = 0; i < d.size(); ++i) {
      xs.emplace_back(d.configs.row(i).data(), d.configs.row(i).data() + d.dim());
      ls.push_back(l + 1);
      ys.push_back(d.observations(i));
    }
  }
  const int n = static_cast<int>(ys.size());
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd ks(n), y(n);
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    y(i) = ys[ui];
    ks(i) = joint_kernel(e, level, xs[ui], ls[ui], p);
    for (int j = 0; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      k(i, j) = joint_kernel(xs[ui], ls[ui], xs[uj], ls[uj], p);
    }
    k(i, i) += p.level_noise_params(ls[ui]).noise_variance;
  }
  const Eigen::MatrixXd kinv = k.inverse();
  return {ks.dot(kinv * y), joint_kernel(e, level, e, level, p) - ks.dot(kinv * ks)};
}

void mf_oracle() {
  Rng rng(derive_seed(2, {1}));
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u;
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int rep = 0; rep < kMfDesigns; ++rep) {
    const int d = 1 + rep % 5;
    const int n_low = 3 + static_cast<int>(rng() % 6);            // 3..8
    const int n_high = 1 + static_cast<int>(rng() % (n_low - 1));  // nested, total <= 12
    MFDataset data;
    data.levels.assign(2, Dataset(d));
    data.level_costs = {1.0, 5.0};
    const auto x = uniform_rows(n_low, d, rng);
    for (int i = 0; i < n_low; ++i) data.levels[0].append(row(x, i), nd(rng));
    for (int i = 0; i < n_high; ++i) data.levels[1].append(row(x, i), nd(rng));
    MFParams p;
    p.base = random_params(d, rng);
    p.gaps = {random_params(d, rng)};
    p.eta = {-2.0 + 4.0 * u(rng)};
    const MFGPPosterior post(data, p);
    const auto probes = uniform_rows(8, d, rng);
    for (int i = 0; i < probes.rows(); ++i) {
      for (int level = 1; level <= 2; ++level) {
        const Prediction got = post.predict(row(probes, i), level);
        const Prediction ref = dense_mf_oracle(data, p, row(probes, i), level);
        worst = std::max({worst, std::fabs(got.mean - ref.mean),
                          std::fabs(got.variance - std::max(0.0, ref.variance))});
      }
    }
  }
  const double secs = seconds_since(t0);
  report(2, worst <= kOracleTol && secs < kOracleSeconds,
         "max |diff| " + fmt("%.3g", worst) + " over " + std::to_string(kMfDesigns) +
             " nested designs, " + fmt("%.3f s", secs));
}

// ---- 3 ----
void degeneracy() {
  Rng rng(derive_seed(3, {1}));
  std::normal_distribution<double> nd;
  double pooled_worst = 0.0, gap_worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 1 + rep % 3;
    const auto x = uniform_rows(6, d, rng);
    MFDataset data;
    data.levels.assign(2, Dataset(d));
    data.level_costs = {1.0, 5.0};
    for (int i = 0; i < 6; ++i) {
      const double y = nd(rng);
      data.levels[0].append(row(x, i), y);
      if (i < 3) data.levels[1].append(row(x, i), y);
    }
    const auto probes = uniform_rows(10, d, rng);

    MFParams same;
    same.base = random_params(d, rng);
    same.gaps = {same.base};
    same.gaps[0].signal_variance = 1e-12;
    same.eta = {1.0};
    const MFGPPosterior mf(data, same);
    Dataset pooled = data.levels[0];
    for (int i = 0; i < 3; ++i) pooled.append(row(x, i), data.levels[1].observations(i));
    const GPPosterior gp(pooled, same.base);

    MFParams split;
    split.base = random_params(d, rng);
    split.gaps = {random_params(d, rng)};
    split.eta = {0.0};
    const MFGPPosterior mf0(data, split);
    const GPPosterior gap(data.levels[1], split.gaps[0]);

    for (int i = 0; i < probes.rows(); ++i) {
      const Prediction a = mf.predict(row(probes, i), 2);
      const Prediction b = gp.mean_var(row(probes, i));
      pooled_worst = std::max({pooled_worst, std::fabs(a.mean - b.mean), std::fabs(a.variance - b.variance)});
      const Prediction c = mf0.predict(row(probes, i), 2);
      const Prediction g = gap.mean_var(row(probes, i));
      gap_worst = std::max({gap_worst, std::fabs(c.mean - g.mean), std::fabs(c.variance - g.variance)});
    }
  }
  report(3, pooled_worst <= kPooledTol && gap_worst <= kGapOnlyTol,
         "pooled " + fmt("%.3g", pooled_worst) + ", gap-only " + fmt("%.3g", gap_worst));
}

// ---- 4 ----
void robustness_suite() {
  Rng rng(derive_seed(4, {1}));
  int mismatches = 0, sign_errors = 0, boundary = 0;
  for (int rep = 0; rep < kSpecPairs; ++rep) {
    const SafetySpec spec = testing::random_spec(rng, 4, false, 3);
    const Trajectory tr = testing::random_trajectory(rng, 50, 3);
    const double r = robustness(spec, tr);
    if (r != testing::brute_value(spec, tr, 0) || spec.depth() > 4) ++mismatches;
    if (r == 0.0) {
      ++boundary;
    } else if ((r > 0.0) != testing::holds(spec, tr, 0)) {
      ++sign_errors;
    }
  }
  report(4, mismatches == 0 && sign_errors == 0,
         std::to_string(kSpecPairs) + " pairs, " + std::to_string(mismatches) + " mismatches, " +
             std::to_string(sign_errors) + " sign errors, " + std::to_string(boundary) + " boundary");
}

// ---- 5 ----
void entropy_sanity() {
  KernelParams p;
  p.signal_variance = 1.0;
  p.lengthscales = {0.2};
  p.noise_variance = 0.0;
  Dataset d(1);
  d.append(std::vector<double>{0.5}, 0.3);
  d.append(std::vector<double>{0.1}, -0.2);
  const GPPosterior post(d, p);
  RepresenterGrid grid;
  grid.points.resize(kEntropyGrid, 1);
  for (int i = 0; i < kEntropyGrid; ++i) grid.points(i, 0) = (i + 0.5) / kEntropyGrid;
  Rng rng(derive_seed(5, {1}));
  const std::vector<double> c{0.5};
  const double zero_gain = expected_entropy_reduction(post, c, 1, grid, 16, 512, rng);

  RepresenterGrid one;
  one.points = grid.points.topRows(1);
  const double point_mass = minimizer_entropy(post, one, 512, rng);

  // Exchangeable prior: lengthscale far below the grid spacing.
  KernelParams iid = p;
  iid.lengthscales = {1e-3};
  const GPPosterior prior(Dataset(1), iid);
  std::vector<double> hs;
  for (int r = 0; r < kEntropyReplicates; ++r) hs.push_back(minimizer_entropy(prior, grid, kEntropyMc, rng));
  double mean = 0.0;
  for (double h : hs) mean += h;
  mean /= kEntropyReplicates;
  double var = 0.0;
  for (double h : hs) var += (h - mean) * (h - mean);
  const double sd = std::sqrt(var / (kEntropyReplicates - 1));
  const double se = sd / std::sqrt(static_cast<double>(kEntropyReplicates));
  const double log_m = std::log(static_cast<double>(kEntropyGrid));
  // The plug-in estimator is biased low by (m-1)/(2n) at a uniform pmf.
  const double target = log_m - (kEntropyGrid - 1.0) / (2.0 * kEntropyMc);
  const bool sym_ok = std::fabs(mean - target) <= 3.0 * se;
  report(5, std::fabs(zero_gain) <= kZeroGainTol && point_mass == 0.0 && sym_ok,
         "zero-variance gain " + fmt("%.3g", zero_gain) + ", point-mass H " + fmt("%.3g", point_mass) +
             ", prior H " + fmt("%.6f", mean) + " vs " + fmt("%.6f", target) + " (log m " +
             fmt("%.6f", log_m) + ", 3se " + fmt("%.2g", 3.0 * se) + ")");
}

// ---- 6, 7, 8 ----
struct CaseRuns {
  CaseId c;
  MethodRun random, bo_hf, mfbo_noise, mfbo_rounding;
  double seconds = 0.0;
};

ExperimentConfig full_budget_config(CaseId c, Method m, FidelityScenario::Kind k) {
  ExperimentConfig cfg;
  cfg.case_id = c;
  cfg.method = m;
  cfg.scenario = k == FidelityScenario::Kind::kSensorNoise ? FidelityScenario::sensor_noise()
                                                           : FidelityScenario::rounding();
  cfg.n_seeds = kSeeds;
  cfg.cost_low = 1.0;
  cfg.cost_high = 5.0;
  return cfg;
}

MethodRun run_method(CaseId c, Method m, FidelityScenario::Kind k) {
  const auto cfg = full_budget_config(c, m, k);
  return {cfg, run_experiment(cfg)};
}

int total_cex(const MethodRun& r) {
  int n = 0;
  for (const auto& s : r.results) n += s.failed ? 0 : s.n_cex;
  return n;
}

std::string describe(const MethodSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "cex %d, min_rho %.4f, hf %.3f, cost %.1f, failed %d", s.total_cex,
                s.mean_min_rho_hf, s.mean_hf_fraction, s.mean_total_cost, s.n_failed);
  return buf;
}

std::vector<CaseRuns> falsification_runs() {
  std::vector<CaseRuns> all;
  for (CaseId c : {CaseId::kCartPole, CaseId::kMountainCar, CaseId::kLander}) {
    const auto t0 = Clock::now();
    CaseRuns cr;
    cr.c = c;
    using K = FidelityScenario::Kind;
    cr.random = run_method(c, Method::kRandom, K::kRounding);
    cr.bo_hf = run_method(c, Method::kBoHf, K::kRounding);
    cr.mfbo_noise = run_method(c, Method::kMfbo, K::kSensorNoise);
    cr.mfbo_rounding = run_method(c, Method::kMfbo, K::kRounding);
    cr.seconds = seconds_since(t0);
    const fs::path out = fs::path("acceptance_out") / std::string(to_string(c));
    write_outputs(out.string(), {cr.random, cr.bo_hf, cr.mfbo_noise, cr.mfbo_rounding});
    std::printf("  %s (%d iterations, %d seeds): %.1f s\n", std::string(to_string(c)).c_str(),
                cr.random.cfg.iterations(), kSeeds, cr.seconds);
    std::printf("    random        %s\n", describe(summarize_method(cr.random)).c_str());
    std::printf("    bo_hf         %s\n", describe(summarize_method(cr.bo_hf)).c_str());
    std::printf("    mfbo noise    %s\n", describe(summarize_method(cr.mfbo_noise)).c_str());
    std::printf("    mfbo rounding %s\n", describe(summarize_method(cr.mfbo_rounding)).c_str());
    std::fflush(stdout);
    all.push_back(std::move(cr));
  }
  return all;
}

void falsification_ordering(const std::vector<CaseRuns>& all) {
  bool ok = true;
  std::string detail;
  for (const auto& cr : all) {
    const int rnd = total_cex(cr.random);
    const int bo = total_cex(cr.bo_hf);
    const double rnd_rho = summarize_method(cr.random).mean_min_rho_hf;
    bool case_ok = bo >= rnd + 1;
    std::string line = std::string(to_string(cr.c)) + ": random " + std::to_string(rnd) + ", bo_hf " +
                       std::to_string(bo);
    for (const MethodRun* mf : {&cr.mfbo_noise, &cr.mfbo_rounding}) {
      const MethodSummary s = summarize_method(*mf);
      case_ok = case_ok && s.total_cex >= rnd + 1 && s.mean_min_rho_hf <= rnd_rho;
      line += ", mfbo[" + std::string(to_string(mf->cfg.scenario.kind)) + "] " +
              std::to_string(s.total_cex) + fmt(" (min_rho %.4f", s.mean_min_rho_hf) +
              fmt(" vs %.4f)", rnd_rho);
    }
    ok = ok && case_ok;
    detail += (detail.empty() ? "" : "; ") + line;
  }
  report(6, ok, detail);
}

void hf_reduction(const std::vector<CaseRuns>& all) {
  bool ok = true;
  std::string detail;
  for (const auto& cr : all) {
    const double f1 = summarize_method(cr.mfbo_noise).mean_hf_fraction;
    const double f2 = summarize_method(cr.mfbo_rounding).mean_hf_fraction;
    ok = ok && f1 <= kHfFractionNoise && f2 <= kHfFractionRounding;
    detail += (detail.empty() ? "" : "; ") + std::string(to_string(cr.c)) + fmt(": noise %.3f", f1) +
              fmt(", rounding %.3f", f2);
  }
  report(7, ok, detail);
}

void cost_efficiency(const std::vector<CaseRuns>& all) {
  int wins_noise = 0, wins_rounding = 0;
  std::string detail;
  for (const auto& cr : all) {
    const double bo_cost = summarize_method(cr.bo_hf).mean_total_cost;
    for (const MethodRun* mf : {&cr.mfbo_noise, &cr.mfbo_rounding}) {
      const double c_star = std::min(summarize_method(*mf).mean_total_cost, bo_cost);
      const double a = mean_cex_within_cost(mf->results, c_star);
      const double b = mean_cex_within_cost(cr.bo_hf.results, c_star);
      const bool win = a >= b;
      (mf == &cr.mfbo_noise ? wins_noise : wins_rounding) += win;
      detail += (detail.empty() ? "" : "; ") + std::string(to_string(cr.c)) + "/" +
                std::string(to_string(mf->cfg.scenario.kind)) + fmt(" @%.1f: ", c_star) +
                fmt("mfbo %.2f", a) + fmt(" vs bo_hf %.2f", b);
    }
  }
  report(8, wins_noise >= 2 && wins_rounding >= 2, detail);
}

// ---- 9 ----
std::string records_without_wall(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  int wall = -1;
  bool header = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (header) {
      for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i] == "wall_ms") wall = static_cast<int>(i);
      header = false;
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (static_cast<int>(i) == wall) continue;
      out += cols[i];
      out += ',';
    }
    out += '\n';
  }
  return wall < 0 ? std::string() : out;
}

void replay() {
  const fs::path dir = fs::absolute("acceptance_replay");
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({
  "case": "lander",
  "scenario": "noise",
  "iterations": 4,
  "seeds": 3,
  "acquisition": {"grid_size": 40, "mc_samples": 128, "fantasies": 4},
  "threads": 2
})";
  std::string texts[2];
  bool ran = true;
  for (int k = 0; k < 2; ++k) {
    const fs::path out = dir / ("run" + std::to_string(k));
    const std::string cmd = std::string(MFBO_CLI_PATH) + " compare --config " + cfg.string() +
                            " --out " + out.string() + " > /dev/null 2>&1";
    ran = ran && std::system(cmd.c_str()) == 0;
    texts[k] = records_without_wall(out / "records.csv");
  }
  const bool ok = ran && !texts[0].empty() && texts[0] == texts[1];
  report(9, ok, ran ? (ok ? "records.csv identical apart from wall_ms (" + std::to_string(texts[0].size()) +
                                " bytes)"
                          : "records.csv differs")
                    : "compare exited nonzero");
}

}  // namespace
}  // namespace mfbo

int main() {
  using namespace mfbo;
  const auto t0 = Clock::now();
  gp_oracle();
  mf_oracle();
  degeneracy();
  robustness_suite();
  entropy_sanity();
  std::printf("full falsification runs:\n");
  const auto all = falsification_runs();
  falsification_ordering(all);
  hf_reduction(all);
  cost_efficiency(all);
  replay();
  std::printf("total %.1f s, %d failing\n", seconds_since(t0), failures);
  return failures == 0 ? 0 : 1;
}
