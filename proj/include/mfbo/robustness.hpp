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

// Temporal safety specifications over finite, discretely sampled
// trajectories and their quantitative robustness.
//
// A node's value at step t:
//   Pred        min(x_t - lower, upper - x_t) / scale
//   Always      min over t' >= t of child(t')
//   Eventually  max over t' >= t of child(t')
//   And / Or    min / max over children at t
// The robustness of a specification is its root value at t = 0. Every
// predicate must sit under at least one temporal operator.

#ifndef MFBO_ROBUSTNESS_HPP_
#define MFBO_ROBUSTNESS_HPP_

#include <span>
#include <string>
#include <vector>

#include "mfbo/common.hpp"
#include "mfbo/gp.hpp"

namespace mfbo {

struct Trajectory {
  double dt = 0.02;
  std::vector<std::string> signal_names;
  RowMatrix states;  // T x n, one row per step

  int length() const { return static_cast<int>(states.rows()); }
  // Throws InvalidSpecError when `name` is not a signal of this trajectory.
  int signal_index(const std::string& name) const;
  void validate() const;
};

struct Pred {
  std::string signal;
  double lower;
  double upper;
  double scale;
};

struct SafetySpec {
  enum class Kind { kPred, kAlways, kEventually, kAnd, kOr };

  Kind kind = Kind::kPred;
  Pred pred{};
  std::vector<SafetySpec> children;

  static SafetySpec predicate(std::string signal, double lower, double upper);
  static SafetySpec predicate(std::string signal, double lower, double upper, double scale);
  static SafetySpec always(SafetySpec child);
  static SafetySpec eventually(SafetySpec child);
  static SafetySpec all_of(std::vector<SafetySpec> children);
  static SafetySpec any_of(std::vector<SafetySpec> children);

  int depth() const;
  // Structural checks: bounds, scales, arity, closedness.
  void validate() const;
};

// `names` labels the components of `state`.
double pred_margin(const Pred& p, std::span<const double> state,
                   const std::vector<std::string>& names);

double robustness(const SafetySpec& spec, const Trajectory& traj);

SafetySpec builtin_spec(CaseId c);

}  // namespace mfbo

#endif  // MFBO_ROBUSTNESS_HPP_
