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

#include "mfbo/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "mfbo/errors.hpp"

namespace mfbo {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  return f;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing column '" + name + "'");
    return static_cast<int>(it - header.begin());
  }
  std::vector<int> prefixed(const std::string& prefix) const {
    std::vector<int> idx;
    for (int k = 0;; ++k) {
      const auto it = std::find(header.begin(), header.end(), prefix + std::to_string(k));
      if (it == header.end()) break;
      idx.push_back(static_cast<int>(it - header.begin()));
    }
    return idx;
  }
};

Table read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size()) throw std::runtime_error("ragged row in '" + path + "'");
    t.rows.push_back(std::move(row));
  }
  return t;
}

double to_real(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("bad number '" + s + "'");
  return v;
}

int to_int(const std::string& s) { return static_cast<int>(to_real(s)); }

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

int dim_of(const std::vector<MethodRun>& runs) {
  int d = -1;
  for (const auto& r : runs) {
    const int k = static_cast<int>(default_box(r.cfg.case_id).size());
    if (d >= 0 && d != k) throw ContractViolation("runs mix cases with different dimensions");
    d = k;
  }
  return std::max(d, 0);
}

std::string run_prefix(const ExperimentConfig& cfg) {
  return std::string(to_string(cfg.method)) + "," + std::string(to_string(cfg.case_id)) + "," +
         std::string(to_string(cfg.scenario.kind));
}

}  // namespace

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

MethodSummary summarize_method(const MethodRun& run) {
  MethodSummary s;
  s.method = run.cfg.method;
  s.case_id = run.cfg.case_id;
  s.scenario = run.cfg.scenario.kind;
  s.n_seeds = static_cast<int>(run.results.size());
  int ok = 0;
  for (const auto& r : run.results) {
    if (r.failed) {
      ++s.n_failed;
      continue;
    }
    ++ok;
    s.total_cex += r.n_cex;
    s.mean_min_rho_hf += r.min_rho_hf;
    s.mean_hf_fraction += r.hf_fraction;
    s.mean_total_cost += r.total_cost;
  }
  if (ok > 0) {
    s.mean_cex = static_cast<double>(s.total_cex) / ok;
    s.mean_min_rho_hf /= ok;
    s.mean_hf_fraction /= ok;
    s.mean_total_cost /= ok;
  } else {
    s.mean_min_rho_hf = s.mean_hf_fraction = s.mean_total_cost = std::nan("");
  }
  return s;
}

double mean_cex_within_cost(const std::vector<SeedResult>& results, double cost) {
  int ok = 0;
  double total = 0.0;
  for (const auto& r : results) {
    if (r.failed) continue;
    ++ok;
    for (const auto& rec : r.records)
      if (rec.is_cex && rec.cum_cost <= cost) total += 1.0;
  }
  return ok > 0 ? total / ok : std::nan("");
}

std::vector<CostCurvePoint> cost_curve(const std::vector<MethodRun>& runs) {
  std::set<double> costs{0.0};
  for (const auto& run : runs)
    for (const auto& r : run.results)
      for (const auto& rec : r.records) costs.insert(rec.cum_cost);
  std::vector<CostCurvePoint> out;
  for (const auto& run : runs)
    for (double c : costs) out.push_back({run.cfg.method, c, mean_cex_within_cost(run.results, c)});
  return out;
}

void write_records_csv(const std::string& path, const std::vector<MethodRun>& runs) {
  const int d = dim_of(runs);
  auto f = open_out(path);
  f << "method,case,scenario,seed,iter,level,cost_lambda,cum_cost,rho,is_cex";
  for (int j = 0; j < d; ++j) f << ",e_" << j;
  f << ",wall_ms,diverged\n";
  for (const auto& run : runs) {
    for (const auto& r : run.results) {
      for (const auto& rec : r.records) {
        f << run_prefix(run.cfg) << ',' << rec.seed << ',' << rec.iter << ',' << rec.level << ','
          << format_real(rec.cost_lambda) << ',' << format_real(rec.cum_cost) << ','
          << format_real(rec.rho) << ',' << (rec.is_cex ? 1 : 0);
        for (double x : rec.e) f << ',' << format_real(x);
        f << ',' << format_real(rec.wall_ms) << ',' << (rec.diverged ? 1 : 0) << '\n';
      }
    }
  }
}

void write_summary_csv(const std::string& path, const std::vector<MethodRun>& runs) {
  const int d = dim_of(runs);
  auto f = open_out(path);
  f << "method,case,scenario,seed,n_cex,min_rho_hf,hf_fraction,total_cost,gp_min_mean";
  for (int j = 0; j < d; ++j) f << ",gp_argmin_e_" << j;
  f << '\n';
  for (const auto& run : runs) {
    for (const auto& r : run.results) {
      f << run_prefix(run.cfg) << ',' << r.seed << ',' << r.n_cex << ',' << format_real(r.min_rho_hf)
        << ',' << format_real(r.hf_fraction) << ',' << format_real(r.total_cost) << ','
        << format_real(r.gp_argmin_e.empty() ? std::nan("") : r.gp_min_mean);
      for (int j = 0; j < d; ++j) {
        f << ',' << format_real(static_cast<std::size_t>(j) < r.gp_argmin_e.size()
                                    ? r.gp_argmin_e[static_cast<std::size_t>(j)]
                                    : std::nan(""));
      }
      f << '\n';
    }
  }
}

void write_comparison_csv(const std::string& path, const std::vector<MethodRun>& runs) {
  auto f = open_out(path);
  f << "method,case,scenario,n_seeds,n_failed,total_cex,mean_n_cex,mean_min_rho_hf,"
       "mean_hf_fraction,mean_total_cost\n";
  for (const auto& run : runs) {
    const MethodSummary s = summarize_method(run);
    f << run_prefix(run.cfg) << ',' << s.n_seeds << ',' << s.n_failed << ',' << s.total_cex << ','
      << format_real(s.mean_cex) << ',' << format_real(s.mean_min_rho_hf) << ','
      << format_real(s.mean_hf_fraction) << ',' << format_real(s.mean_total_cost) << '\n';
  }
}

void write_cost_curve_csv(const std::string& path, const std::vector<MethodRun>& runs) {
  auto f = open_out(path);
  f << "method,case,scenario,cost,mean_n_cex\n";
  std::map<Method, const ExperimentConfig*> cfg_of;
  for (const auto& run : runs) cfg_of[run.cfg.method] = &run.cfg;
  for (const auto& p : cost_curve(runs)) {
    f << run_prefix(*cfg_of.at(p.method)) << ',' << format_real(p.cost) << ','
      << format_real(p.mean_cex) << '\n';
  }
}

void write_failures_csv(const std::string& path, const std::vector<MethodRun>& runs) {
  auto f = open_out(path);
  f << "method,case,scenario,seed,message\n";
  for (const auto& run : runs)
    for (const auto& r : run.results)
      if (r.failed) f << run_prefix(run.cfg) << ',' << r.seed << ',' << sanitize(r.failure) << '\n';
}

void write_outputs(const std::string& dir, const std::vector<MethodRun>& runs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  const std::filesystem::path p(dir);
  write_records_csv((p / "records.csv").string(), runs);
  write_summary_csv((p / "summary.csv").string(), runs);
  write_comparison_csv((p / "comparison.csv").string(), runs);
  write_cost_curve_csv((p / "cost_curve.csv").string(), runs);
  write_failures_csv((p / "failures.csv").string(), runs);
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
  const Table t = read_table(path);
  const int c_method = t.col("method"), c_case = t.col("case"), c_scen = t.col("scenario");
  const int c_seed = t.col("seed"), c_iter = t.col("iter"), c_level = t.col("level");
  const int c_lambda = t.col("cost_lambda"), c_cum = t.col("cum_cost"), c_rho = t.col("rho");
  const int c_cex = t.col("is_cex"), c_wall = t.col("wall_ms");
  const auto c_e = t.prefixed("e_");
  const auto it = std::find(t.header.begin(), t.header.end(), "diverged");
  const int c_div = it == t.header.end() ? -1 : static_cast<int>(it - t.header.begin());
  std::vector<RunRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    RunRecord r;
    r.method = parse_method(row[c_method]);
    r.case_id = parse_case(row[c_case]);
    r.scenario = parse_scenario(row[c_scen]);
    r.seed = to_int(row[c_seed]);
    r.iter = to_int(row[c_iter]);
    r.level = to_int(row[c_level]);
    r.cost_lambda = to_real(row[c_lambda]);
    r.cum_cost = to_real(row[c_cum]);
    r.rho = to_real(row[c_rho]);
    r.is_cex = to_int(row[c_cex]) != 0;
    for (int c : c_e) r.e.push_back(to_real(row[static_cast<std::size_t>(c)]));
    r.wall_ms = to_real(row[c_wall]);
    r.diverged = c_div >= 0 && to_int(row[static_cast<std::size_t>(c_div)]) != 0;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MethodRun> load_outputs(const std::string& dir) {
  const std::filesystem::path p(dir);
  using Key = std::tuple<Method, CaseId, FidelityScenario::Kind>;
  std::map<Key, std::map<int, SeedResult>> groups;
  auto slot = [&](Method m, CaseId c, FidelityScenario::Kind k, int seed) -> SeedResult& {
    SeedResult& r = groups[{m, c, k}][seed];
    r.method = m;
    r.seed = seed;
    return r;
  };

  for (auto& rec : read_records_csv((p / "records.csv").string())) {
    SeedResult& r = slot(rec.method, rec.case_id, rec.scenario, rec.seed);
    r.records.push_back(std::move(rec));
  }
  if (std::filesystem::exists(p / "failures.csv")) {
    const Table t = read_table((p / "failures.csv").string());
    for (const auto& row : t.rows) {
      SeedResult& r = slot(parse_method(row[t.col("method")]), parse_case(row[t.col("case")]),
                           parse_scenario(row[t.col("scenario")]), to_int(row[t.col("seed")]));
      r.failed = true;
      r.failure = row[t.col("message")];
    }
  }
  for (auto& [key, seeds] : groups)
    for (auto& [seed, r] : seeds) summarize(r);

  if (std::filesystem::exists(p / "summary.csv")) {
    const Table t = read_table((p / "summary.csv").string());
    const auto c_arg = t.prefixed("gp_argmin_e_");
    for (const auto& row : t.rows) {
      const Key key{parse_method(row[t.col("method")]), parse_case(row[t.col("case")]),
                    parse_scenario(row[t.col("scenario")])};
      const int seed = to_int(row[t.col("seed")]);
      SeedResult& r = slot(std::get<0>(key), std::get<1>(key), std::get<2>(key), seed);
      auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
      if (to_int(row[t.col("n_cex")]) != r.n_cex ||
          !same(to_real(row[t.col("min_rho_hf")]), r.min_rho_hf) ||
          !same(to_real(row[t.col("hf_fraction")]), r.hf_fraction) ||
          !same(to_real(row[t.col("total_cost")]), r.total_cost)) {
        throw std::runtime_error("summary.csv disagrees with records.csv for " +
                                 std::string(to_string(std::get<0>(key))) + " seed " +
                                 std::to_string(seed));
      }
      r.gp_min_mean = to_real(row[t.col("gp_min_mean")]);
      r.gp_argmin_e.clear();
      for (int c : c_arg) r.gp_argmin_e.push_back(to_real(row[static_cast<std::size_t>(c)]));
      if (std::any_of(r.gp_argmin_e.begin(), r.gp_argmin_e.end(), [](double x) { return std::isnan(x); })) {
        r.gp_argmin_e.clear();
      }
    }
  }

  std::vector<MethodRun> runs;
  for (auto& [key, seeds] : groups) {
    MethodRun run;
    run.cfg.method = std::get<0>(key);
    run.cfg.case_id = std::get<1>(key);
    run.cfg.scenario.kind = std::get<2>(key);
    run.cfg.n_seeds = static_cast<int>(seeds.size());
    for (auto& [seed, r] : seeds) run.results.push_back(std::move(r));
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace mfbo
