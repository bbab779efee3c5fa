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

#include "mfbo/common.hpp"

#include <set>

#include "mfbo/errors.hpp"

namespace mfbo {

std::string_view to_string(CaseId c) {
  switch (c) {
    case CaseId::kCartPole:
      return "cartpole";
    case CaseId::kMountainCar:
      return "mountaincar";
    case CaseId::kLander:
      return "lander";
  }
  return "unknown";
}

CaseId parse_case(std::string_view name) {
  if (name == "cartpole") return CaseId::kCartPole;
  if (name == "mountaincar") return CaseId::kMountainCar;
  if (name == "lander") return CaseId::kLander;
  throw ConfigError("unknown case '" + std::string(name) + "'");
}

void EnvBox::validate() const {
  std::set<std::string> names;
  for (const auto& d : dims) {
    if (!(d.lower <= d.upper)) throw ContractViolation("box dimension '" + d.name + "' has lower > upper");
    if (!names.insert(d.name).second) throw ContractViolation("duplicate box dimension '" + d.name + "'");
  }
}

bool EnvBox::contains(std::span<const double> e) const {
  if (e.size() != dims.size()) return false;
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (!(e[j] >= dims[j].lower && e[j] <= dims[j].upper)) return false;
  }
  return true;
}

std::vector<double> EnvBox::to_unit(std::span<const double> e) const {
  if (e.size() != dims.size()) throw ContractViolation("to_unit: dimension mismatch");
  std::vector<double> u(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) {
    const double w = dims[j].upper - dims[j].lower;
    u[j] = w > 0.0 ? (e[j] - dims[j].lower) / w : 0.5;
  }
  return u;
}

std::vector<double> EnvBox::from_unit(std::span<const double> u) const {
  if (u.size() != dims.size()) throw ContractViolation("from_unit: dimension mismatch");
  std::vector<double> e(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double w = dims[j].upper - dims[j].lower;
    e[j] = w > 0.0 ? dims[j].lower + u[j] * w : dims[j].lower;
    // Guard the upper edge against rounding.
    if (e[j] > dims[j].upper) e[j] = dims[j].upper;
    if (e[j] < dims[j].lower) e[j] = dims[j].lower;
  }
  return e;
}

}  // namespace mfbo
