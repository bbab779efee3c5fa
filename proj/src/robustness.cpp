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

#include "mfbo/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfbo/errors.hpp"

namespace mfbo {

namespace {

using Signal = std::vector<double>;

void check_pred(const Pred& p) {
  if (!(p.lower < p.upper)) throw InvalidSpecError("predicate on '" + p.signal + "': lower >= upper");
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) {
    throw InvalidSpecError("predicate on '" + p.signal + "': scale must be positive");
  }
}

void check_node(const SafetySpec& s, bool under_temporal) {
  using K = SafetySpec::Kind;
  switch (s.kind) {
    case K::kPred:
      check_pred(s.pred);
      if (!under_temporal) {
        throw InvalidSpecError("predicate on '" + s.pred.signal + "' is not under a temporal operator");
      }
      if (!s.children.empty()) throw InvalidSpecError("predicate nodes take no children");
      return;
    case K::kAlways:
    case K::kEventually:
      if (s.children.size() != 1) throw InvalidSpecError("temporal operators take exactly one child");
      check_node(s.children[0], true);
      return;
    case K::kAnd:
    case K::kOr:
      if (s.children.empty()) throw InvalidSpecError("and/or need at least one child");
      for (const auto& c : s.children) check_node(c, under_temporal);
      return;
  }
}

Signal evaluate(const SafetySpec& s, const Trajectory& traj) {
  using K = SafetySpec::Kind;
  const auto t_len = static_cast<std::size_t>(traj.length());
  switch (s.kind) {
    case K::kPred: {
      const int col = traj.signal_index(s.pred.signal);
      Signal out(t_len);
      for (std::size_t t = 0; t < t_len; ++t) {
        const double x = traj.states(static_cast<Eigen::Index>(t), col);
        out[t] = std::min(x - s.pred.lower, s.pred.upper - x) / s.pred.scale;
      }
      return out;
    }
    case K::kAlways: {
      Signal out = evaluate(s.children[0], traj);
      for (std::size_t t = t_len - 1; t-- > 0;) out[t] = std::min(out[t], out[t + 1]);
      return out;
    }
    case K::kEventually: {
      Signal out = evaluate(s.children[0], traj);
      for (std::size_t t = t_len - 1; t-- > 0;) out[t] = std::max(out[t], out[t + 1]);
      return out;
    }
    case K::kAnd:
    case K::kOr: {
      Signal out = evaluate(s.children[0], traj);
      for (std::size_t c = 1; c < s.children.size(); ++c) {
        const Signal other = evaluate(s.children[c], traj);
        for (std::size_t t = 0; t < t_len; ++t) {
          out[t] = s.kind == K::kAnd ? std::min(out[t], other[t]) : std::max(out[t], other[t]);
        }
      }
      return out;
    }
  }
  return {};
}

int depth_of(const SafetySpec& s) {
  int d = 0;
  for (const auto& c : s.children) d = std::max(d, depth_of(c));
  return d + 1;
}

}  // namespace

int Trajectory::signal_index(const std::string& name) const {
  const auto it = std::find(signal_names.begin(), signal_names.end(), name);
  if (it == signal_names.end()) throw InvalidSpecError("unknown signal '" + name + "'");
  return static_cast<int>(it - signal_names.begin());
}

void Trajectory::validate() const {
  if (!(dt > 0.0)) throw ContractViolation("trajectory dt must be positive");
  if (states.rows() < 1) throw ContractViolation("trajectory must have at least one state");
  if (static_cast<std::size_t>(states.cols()) != signal_names.size()) {
    throw ContractViolation("trajectory: one signal name per state component required");
  }
  if (!states.allFinite()) throw ContractViolation("trajectory has non-finite entries");
}

SafetySpec SafetySpec::predicate(std::string signal, double lower, double upper) {
  return predicate(std::move(signal), lower, upper, 0.5 * (upper - lower));
}

SafetySpec SafetySpec::predicate(std::string signal, double lower, double upper, double scale) {
  SafetySpec s;
  s.kind = Kind::kPred;
  s.pred = Pred{std::move(signal), lower, upper, scale};
  return s;
}

SafetySpec SafetySpec::always(SafetySpec child) {
  SafetySpec s;
  s.kind = Kind::kAlways;
  s.children.push_back(std::move(child));
  return s;
}

SafetySpec SafetySpec::eventually(SafetySpec child) {
  SafetySpec s;
  s.kind = Kind::kEventually;
  s.children.push_back(std::move(child));
  return s;
}

SafetySpec SafetySpec::all_of(std::vector<SafetySpec> children) {
  SafetySpec s;
  s.kind = Kind::kAnd;
  s.children = std::move(children);
  return s;
}

SafetySpec SafetySpec::any_of(std::vector<SafetySpec> children) {
  SafetySpec s;
  s.kind = Kind::kOr;
  s.children = std::move(children);
  return s;
}

int SafetySpec::depth() const { return depth_of(*this); }

void SafetySpec::validate() const { check_node(*this, false); }

double pred_margin(const Pred& p, std::span<const double> state,
                   const std::vector<std::string>& names) {
  check_pred(p);
  const auto it = std::find(names.begin(), names.end(), p.signal);
  if (it == names.end() || static_cast<std::size_t>(it - names.begin()) >= state.size()) {
    throw InvalidSpecError("unknown signal '" + p.signal + "'");
  }
  const double x = state[static_cast<std::size_t>(it - names.begin())];
  return std::min(x - p.lower, p.upper - x) / p.scale;
}

double robustness(const SafetySpec& spec, const Trajectory& traj) {
  spec.validate();
  traj.validate();
  return evaluate(spec, traj).front();
}

SafetySpec builtin_spec(CaseId c) {
  using S = SafetySpec;
  constexpr double kPi = std::numbers::pi;
  switch (c) {
    case CaseId::kCartPole: {
      const double max_angle = 9.0 * kPi / 180.0;
      return S::all_of({S::always(S::predicate("x", -1.0, 1.0)),
                        S::always(S::predicate("momentum", -1.0, 1.0)),
                        S::always(S::predicate("theta", -max_angle, max_angle))});
    }
    case CaseId::kMountainCar:
      // goal_gap = x - goal_x; displacement = x - x0. The goal predicate is
      // one-sided, so its scale is pinned to the displacement tolerance.
      return S::all_of(
          {S::any_of({S::eventually(S::predicate("goal_gap", 0.0, 10.0, 0.35)),
                      S::always(S::predicate("displacement", -0.35, 0.35))}),
           S::always(S::predicate("v", -0.04, 0.04))});
    case CaseId::kLander:
      return S::all_of({S::always(S::predicate("x", -0.1, 0.1)),
                        S::always(S::predicate("theta", -kPi / 4.0, kPi / 4.0)),
                        S::always(S::predicate("theta_dot", -0.2, 0.2))});
  }
  throw ContractViolation("unknown case");
}

}  // namespace mfbo
