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

// Entropy-search acquisition on a finite representer grid.
//
// P(e*) is estimated by Monte Carlo: joint posterior samples of the top
// fidelity over the grid, argmin per sample, empirical pmf. Fantasy
// conditioning reuses the same samples through a pathwise rank-1 update
//   f | y  =  f + k(., c) / k(c, c) * (y - f(c))
// so each fantasy costs one affine argmin per sample.

#ifndef MFBO_ACQUISITION_HPP_
#define MFBO_ACQUISITION_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "mfbo/common.hpp"
#include "mfbo/gp.hpp"
#include "mfbo/random.hpp"

namespace mfbo {

struct RepresenterGrid {
  RowMatrix points;  // m x d, unit-box coordinates
  std::uint64_t seed = 0;
  const char* sequence = "sobol-cp";

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  // Rows inside [0,1]^d and pairwise distinct. `min_points` is 2 for
  // grids handed to the loop; tests may build single-point grids.
  void validate(int min_points = 2) const;
};

// m Sobol points in [0,1)^d under a Cranley-Patterson shift drawn from seed.
RepresenterGrid make_grid(int m, int d, std::uint64_t seed);

struct AcquisitionBudget {
  int grid_size = 200;
  int n_mc = 512;
  int n_fantasy = 16;
};

struct AcquisitionDecision {
  std::vector<double> config;
  int level = 1;
  int grid_index = 0;
  double score = 0.0;
  double raw_gain = 0.0;
};

double minimizer_entropy(const LatentModel& post, const RepresenterGrid& grid, int n_mc, Rng& rng);

double expected_entropy_reduction(const LatentModel& post, std::span<const double> candidate,
                                  int level, const RepresenterGrid& grid, int n_fantasy,
                                  int n_mc, Rng& rng);

// Maximizes gain / cost over every (grid point, level) pair. Ties go to the
// higher level, then the lower grid index.
AcquisitionDecision select_next(const LatentModel& post, const RepresenterGrid& grid,
                                std::span<const double> costs, const AcquisitionBudget& budget,
                                Rng& rng);

// All per-pair gains from one select_next-style evaluation, level-major
// (gains[(level-1)*m + j]). Exposed for diagnostics and tests.
std::vector<double> all_gains(const LatentModel& post, const RepresenterGrid& grid,
                              const AcquisitionBudget& budget, Rng& rng);

// Uniform point in the raw box.
std::vector<double> random_select(const EnvBox& box, Rng& rng);

}  // namespace mfbo

#endif  // MFBO_ACQUISITION_HPP_
