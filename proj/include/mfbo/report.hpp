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

// CSV output and cross-method aggregation.
//
//   records.csv     one row per simulator call
//   summary.csv     one row per (method, seed)
//   comparison.csv  per-method averages of the summary columns
//   cost_curve.csv  mean counterexamples found within a cumulative cost
//   failures.csv    seeds aborted by a model failure
//
// Reals are written with %.17g so files round-trip exactly.

#ifndef MFBO_REPORT_HPP_
#define MFBO_REPORT_HPP_

#include <string>
#include <vector>

#include "mfbo/harness.hpp"

namespace mfbo {

struct MethodRun {
  ExperimentConfig cfg;
  std::vector<SeedResult> results;
};

struct MethodSummary {
  Method method = Method::kMfbo;
  CaseId case_id = CaseId::kCartPole;
  FidelityScenario::Kind scenario = FidelityScenario::Kind::kRounding;
  int n_seeds = 0;
  int n_failed = 0;
  int total_cex = 0;
  double mean_cex = 0.0;
  double mean_min_rho_hf = 0.0;
  double mean_hf_fraction = 0.0;
  double mean_total_cost = 0.0;
};

struct CostCurvePoint {
  Method method = Method::kMfbo;
  double cost = 0.0;
  double mean_cex = 0.0;
};

std::string format_real(double x);

// Failed seeds are counted but left out of the averages.
MethodSummary summarize_method(const MethodRun& run);

// Mean over non-failed seeds of the number of counterexamples whose record
// has cum_cost <= cost.
double mean_cex_within_cost(const std::vector<SeedResult>& results, double cost);

// Evaluated at every distinct cumulative cost seen in any of the runs.
std::vector<CostCurvePoint> cost_curve(const std::vector<MethodRun>& runs);

void write_records_csv(const std::string& path, const std::vector<MethodRun>& runs);
void write_summary_csv(const std::string& path, const std::vector<MethodRun>& runs);
void write_comparison_csv(const std::string& path, const std::vector<MethodRun>& runs);
void write_cost_curve_csv(const std::string& path, const std::vector<MethodRun>& runs);
void write_failures_csv(const std::string& path, const std::vector<MethodRun>& runs);

// Creates `dir` and writes all five files.
void write_outputs(const std::string& dir, const std::vector<MethodRun>& runs);

// Rebuilds per-seed results from an existing output directory (records.csv,
// plus failures.csv and summary.csv when present). Throws std::runtime_error
// if summary.csv disagrees with the aggregates recomputed from records.csv.
std::vector<MethodRun> load_outputs(const std::string& dir);

std::vector<RunRecord> read_records_csv(const std::string& path);

}  // namespace mfbo

#endif  // MFBO_REPORT_HPP_
