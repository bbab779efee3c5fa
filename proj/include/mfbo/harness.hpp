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

// Falsification loop: initial design, model fit, acquisition, simulation,
// robustness, cost accounting. One seed per call; run_experiment fans out.

#ifndef MFBO_HARNESS_HPP_
#define MFBO_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfbo/acquisition.hpp"
#include "mfbo/common.hpp"
#include "mfbo/environments.hpp"
#include "mfbo/robustness.hpp"

namespace mfbo {

enum class Method { kMfbo, kBoHf, kRandom };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);  // throws ConfigError

// Budgets used in the case studies: 30 / 25 / 35 iterations.
int default_iterations(CaseId c);

struct ExperimentConfig {
  CaseId case_id = CaseId::kCartPole;
  FidelityScenario scenario;
  Method method = Method::kMfbo;
  int n_iterations = 0;  // 0 selects default_iterations(case_id)
  int n_seeds = 15;
  double cost_low = 1.0;
  double cost_high = 5.0;
  int init_low = 8;
  int init_high = 4;
  AcquisitionBudget budget;
  int refit_every = 5;  // hyperparameter refit period, in iterations
  int threads = 0;      // 0 = hardware concurrency
  std::string out_dir = "out";
  std::optional<SafetySpec> spec;  // builtin spec when empty

  int iterations() const { return n_iterations > 0 ? n_iterations : default_iterations(case_id); }
  SafetySpec safety_spec() const { return spec ? *spec : builtin_spec(case_id); }
  // Throws ConfigError.
  void validate() const;
};

struct RunRecord {
  Method method = Method::kMfbo;
  CaseId case_id = CaseId::kCartPole;
  FidelityScenario::Kind scenario = FidelityScenario::Kind::kRounding;
  int seed = 0;
  int iter = 0;  // 0 for initial-design rows, then 1..n
  int level = 2;
  double cost_lambda = 0.0;
  double cum_cost = 0.0;
  double rho = 0.0;
  bool is_cex = false;
  std::vector<double> e;  // raw configuration
  double wall_ms = 0.0;
  bool diverged = false;
};

struct SeedResult {
  Method method = Method::kMfbo;
  int seed = 0;
  std::vector<RunRecord> records;
  bool failed = false;
  std::string failure;

  int n_cex = 0;
  double min_rho_hf = 0.0;
  double hf_fraction = 0.0;  // over loop iterations only
  double total_cost = 0.0;
  std::vector<double> best_hf_e;
  // Grid minimizer of the top-level posterior mean (model methods only).
  double gp_min_mean = 0.0;
  std::vector<double> gp_argmin_e;
};

// Recomputes n_cex, min_rho_hf, hf_fraction and total_cost from records.
void summarize(SeedResult& r, int top_level = 2);

SeedResult run_mfbo(const ExperimentConfig& cfg, int seed);
SeedResult run_single_fidelity_bo(const ExperimentConfig& cfg, int seed);
SeedResult run_random_search(const ExperimentConfig& cfg, int seed);
SeedResult run_seed(const ExperimentConfig& cfg, int seed);

// Seeds 0..n_seeds-1, sorted by seed regardless of worker scheduling.
std::vector<SeedResult> run_experiment(const ExperimentConfig& cfg);

}  // namespace mfbo

#endif  // MFBO_HARNESS_HPP_
