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

#ifndef MFBO_COMMON_HPP_
#define MFBO_COMMON_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfbo {

enum class CaseId { kCartPole, kMountainCar, kLander };

std::string_view to_string(CaseId c);
CaseId parse_case(std::string_view name);  // throws ConfigError

// Box-constrained uncertainty space. Raw configurations live in this box;
// models see them affinely mapped onto the unit hypercube.
struct EnvBox {
  struct Dim {
    std::string name;
    double lower;
    double upper;
  };
  std::vector<Dim> dims;

  std::size_t size() const { return dims.size(); }
  void validate() const;
  bool contains(std::span<const double> e) const;
  std::vector<double> to_unit(std::span<const double> e) const;
  std::vector<double> from_unit(std::span<const double> u) const;
};

}  // namespace mfbo

#endif  // MFBO_COMMON_HPP_
