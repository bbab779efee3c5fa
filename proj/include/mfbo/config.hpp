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

// JSON experiment configuration.
//
// {
//   "case": "cartpole" | "mountaincar" | "lander",
//   "scenario": "noise" | "rounding",
//   "method": "mfbo" | "bo_hf" | "random",
//   "iterations": 0,              // 0 = case default (30 / 25 / 35)
//   "seeds": 15,
//   "costs": {"low": 1, "high": 5},
//   "init": {"low": 8, "high": 4},
//   "acquisition": {"grid_size": 200, "mc_samples": 512, "fantasies": 16},
//   "refit_every": 5,
//   "threads": 0,
//   "noise_std": [],              // empty = case default
//   "decimals": 2,
//   "out": "out",
//   "spec": null                  // or a formula tree, see spec_from_json
// }
//
// Every key is optional; unknown keys are rejected.

#ifndef MFBO_CONFIG_HPP_
#define MFBO_CONFIG_HPP_

#include <string>

#include "json.hpp"
#include "mfbo/harness.hpp"

namespace mfbo {

// Formula nodes:
//   {"op": "pred", "signal": "x", "lower": -1, "upper": 1, "scale": 1}
//   {"op": "always" | "eventually", "child": {...}}
//   {"op": "and" | "or", "children": [{...}, ...]}
// "scale" is optional (defaults to the half-width).
SafetySpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SafetySpec& s);

// Applies the keys present in `j` on top of `base`. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

}  // namespace mfbo

#endif  // MFBO_CONFIG_HPP_
