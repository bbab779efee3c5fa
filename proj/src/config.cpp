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

#include "mfbo/config.hpp"

#include <fstream>
#include <set>

#include "mfbo/errors.hpp"

namespace mfbo {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

SafetySpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("spec node must be an object");
  const auto op = get<std::string>(j, "op");
  SafetySpec s;
  try {
    if (op == "pred") {
      reject_unknown(j, {"op", "signal", "lower", "upper", "scale"}, "pred");
      const auto sig = get<std::string>(j, "signal");
      const auto lo = get<double>(j, "lower");
      const auto hi = get<double>(j, "upper");
      s = j.contains("scale") ? SafetySpec::predicate(sig, lo, hi, get<double>(j, "scale"))
                              : SafetySpec::predicate(sig, lo, hi);
    } else if (op == "always" || op == "eventually") {
      reject_unknown(j, {"op", "child"}, op);
      if (!j.contains("child")) throw ConfigError(op + " needs a 'child'");
      SafetySpec c = spec_from_json(j.at("child"));
      s = op == "always" ? SafetySpec::always(std::move(c)) : SafetySpec::eventually(std::move(c));
    } else if (op == "and" || op == "or") {
      reject_unknown(j, {"op", "children"}, op);
      if (!j.contains("children") || !j.at("children").is_array()) {
        throw ConfigError(op + " needs a 'children' array");
      }
      std::vector<SafetySpec> kids;
      for (const auto& c : j.at("children")) kids.push_back(spec_from_json(c));
      s = op == "and" ? SafetySpec::all_of(std::move(kids)) : SafetySpec::any_of(std::move(kids));
    } else {
      throw ConfigError("unknown spec op '" + op + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid spec: ") + e.what());
  }
  return s;
}

json spec_to_json(const SafetySpec& s) {
  switch (s.kind) {
    case SafetySpec::Kind::kPred:
      return {{"op", "pred"},
              {"signal", s.pred.signal},
              {"lower", s.pred.lower},
              {"upper", s.pred.upper},
              {"scale", s.pred.scale}};
    case SafetySpec::Kind::kAlways:
      return {{"op", "always"}, {"child", spec_to_json(s.children.at(0))}};
    case SafetySpec::Kind::kEventually:
      return {{"op", "eventually"}, {"child", spec_to_json(s.children.at(0))}};
    case SafetySpec::Kind::kAnd:
    case SafetySpec::Kind::kOr: {
      json kids = json::array();
      for (const auto& c : s.children) kids.push_back(spec_to_json(c));
      return {{"op", s.kind == SafetySpec::Kind::kAnd ? "and" : "or"}, {"children", kids}};
    }
  }
  return nullptr;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig cfg) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"case", "scenario", "method", "iterations", "seeds", "costs", "init",
                  "acquisition", "refit_every", "threads", "noise_std", "decimals", "out", "spec"},
                 "config");
  if (j.contains("case")) cfg.case_id = parse_case(get<std::string>(j, "case"));
  if (j.contains("scenario")) {
    const auto kind = parse_scenario(get<std::string>(j, "scenario"));
    cfg.scenario.kind = kind;
  }
  if (j.contains("method")) cfg.method = parse_method(get<std::string>(j, "method"));
  if (j.contains("iterations")) cfg.n_iterations = get<int>(j, "iterations");
  if (j.contains("seeds")) cfg.n_seeds = get<int>(j, "seeds");
  if (j.contains("costs")) {
    const auto& c = j.at("costs");
    if (!c.is_object()) throw ConfigError("'costs' must be an object");
    reject_unknown(c, {"low", "high"}, "costs");
    if (c.contains("low")) cfg.cost_low = get<double>(c, "low");
    if (c.contains("high")) cfg.cost_high = get<double>(c, "high");
  }
  if (j.contains("init")) {
    const auto& c = j.at("init");
    if (!c.is_object()) throw ConfigError("'init' must be an object");
    reject_unknown(c, {"low", "high"}, "init");
    if (c.contains("low")) cfg.init_low = get<int>(c, "low");
    if (c.contains("high")) cfg.init_high = get<int>(c, "high");
  }
  if (j.contains("acquisition")) {
    const auto& c = j.at("acquisition");
    if (!c.is_object()) throw ConfigError("'acquisition' must be an object");
    reject_unknown(c, {"grid_size", "mc_samples", "fantasies"}, "acquisition");
    if (c.contains("grid_size")) cfg.budget.grid_size = get<int>(c, "grid_size");
    if (c.contains("mc_samples")) cfg.budget.n_mc = get<int>(c, "mc_samples");
    if (c.contains("fantasies")) cfg.budget.n_fantasy = get<int>(c, "fantasies");
  }
  if (j.contains("refit_every")) cfg.refit_every = get<int>(j, "refit_every");
  if (j.contains("threads")) cfg.threads = get<int>(j, "threads");
  if (j.contains("noise_std")) cfg.scenario.noise_std = get<std::vector<double>>(j, "noise_std");
  if (j.contains("decimals")) cfg.scenario.decimals = get<int>(j, "decimals");
  if (j.contains("out")) cfg.out_dir = get<std::string>(j, "out");
  if (j.contains("spec")) {
    if (j.at("spec").is_null()) {
      cfg.spec.reset();
    } else {
      cfg.spec = spec_from_json(j.at("spec"));
    }
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["case"] = std::string(to_string(cfg.case_id));
  j["scenario"] = std::string(to_string(cfg.scenario.kind));
  j["method"] = std::string(to_string(cfg.method));
  j["iterations"] = cfg.n_iterations;
  j["seeds"] = cfg.n_seeds;
  j["costs"] = {{"low", cfg.cost_low}, {"high", cfg.cost_high}};
  j["init"] = {{"low", cfg.init_low}, {"high", cfg.init_high}};
  j["acquisition"] = {{"grid_size", cfg.budget.grid_size},
                      {"mc_samples", cfg.budget.n_mc},
                      {"fantasies", cfg.budget.n_fantasy}};
  j["refit_every"] = cfg.refit_every;
  j["threads"] = cfg.threads;
  j["noise_std"] = cfg.scenario.noise_std;
  j["decimals"] = cfg.scenario.decimals;
  j["out"] = cfg.out_dir;
  j["spec"] = cfg.spec ? spec_to_json(*cfg.spec) : json(nullptr);
  return j;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j, std::move(base));
}

}  // namespace mfbo
