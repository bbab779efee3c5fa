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

#include "mfbo/acquisition.hpp"

#include <cmath>
#include <string>

#include "mfbo/errors.hpp"
#include "mfbo/simd/kernels.hpp"

namespace mfbo {

namespace {

// Below this (relative to the prior scale) a candidate is treated as known.
constexpr double kVarianceFloor = 1e-10;

double entropy_of_counts(const std::vector<int>& counts, int n) {
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

void check_model(const LatentModel& post, const RepresenterGrid& grid) {
  if (grid.size() < 1) throw ContractViolation("representer grid is empty");
  if (grid.dim() != post.dim()) throw ContractViolation("grid and model dimensions differ");
}

// Joint samples over a set of (config, level) variables with the top-level
// grid block stored contiguously at `top`.
class PathwiseSampler {
 public:
  PathwiseSampler(const LatentModel& post, RowMatrix configs, std::vector<int> levels, int top,
                  int m, int n_mc, int n_fantasy, Rng& rng)
      : post_(post), levels_(std::move(levels)), top_(top), m_(m), n_mc_(n_mc) {
    dist_ = post.joint(configs, levels_);
    scale_ = post.prior_scale();
    samples_ = sample_gaussian(dist_, n_mc, scale_, rng);
    if (n_fantasy > 0) z_ = standard_normal_vector(n_fantasy, rng);
    counts_.assign(static_cast<std::size_t>(m), 0);
  }

  double baseline_entropy() {
    std::fill(counts_.begin(), counts_.end(), 0);
    const auto v = static_cast<std::size_t>(samples_.cols());
    const std::vector<double> zero(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < n_mc_; ++i) {
      const double* row = samples_.data() + static_cast<std::size_t>(i) * v + top_;
      ++counts_[simd::argmin_affine(row, zero.data(), 0.0, static_cast<std::size_t>(m_))];
    }
    return entropy_of_counts(counts_, n_mc_);
  }

  // Expected posterior entropy after observing variable `c` (its fantasies).
  // Returns NaN when the candidate carries no information.
  double conditional_entropy(int c) {
    const double s = dist_.cov(c, c);
    if (!(s > kVarianceFloor * scale_)) return std::nan("");
    Eigen::VectorXd dir = dist_.cov.col(c).segment(top_, m_) / s;
    const double sd = std::sqrt(s + post_.noise_variance(levels_[static_cast<std::size_t>(c)]));
    const auto v = static_cast<std::size_t>(samples_.cols());
    double total = 0.0;
    for (Eigen::Index k = 0; k < z_.size(); ++k) {
      const double ybar = dist_.mean(c) + sd * z_(k);
      std::fill(counts_.begin(), counts_.end(), 0);
      for (int i = 0; i < n_mc_; ++i) {
        const double* row = samples_.data() + static_cast<std::size_t>(i) * v;
        const double a = ybar - row[c];
        ++counts_[simd::argmin_affine(row + top_, dir.data(), a, static_cast<std::size_t>(m_))];
      }
      total += entropy_of_counts(counts_, n_mc_);
    }
    return total / static_cast<double>(z_.size());
  }

 private:
  const LatentModel& post_;
  std::vector<int> levels_;
  int top_;
  int m_;
  int n_mc_;
  JointPrediction dist_;
  double scale_ = 1.0;
  RowMatrix samples_;
  Eigen::VectorXd z_;
  std::vector<int> counts_;
};

}  // namespace

void RepresenterGrid::validate(int min_points) const {
  if (size() < min_points) {
    throw ContractViolation("representer grid needs at least " + std::to_string(min_points) +
                            " points");
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const double x = points(i, j);
      if (!(x >= 0.0 && x <= 1.0)) throw ContractViolation("grid point outside the unit box");
    }
    for (Eigen::Index r = 0; r < i; ++r)
      if (points.row(r) == points.row(i)) throw ContractViolation("grid points must be distinct");
  }
}

RepresenterGrid make_grid(int m, int d, std::uint64_t seed) {
  if (m < 1 || d < 1) throw ContractViolation("make_grid: need m >= 1 and d >= 1");
  Rng rng(seed);
  RepresenterGrid g;
  g.points = scrambled_sobol(m, d, rng);
  g.seed = seed;
  return g;
}

double minimizer_entropy(const LatentModel& post, const RepresenterGrid& grid, int n_mc, Rng& rng) {
  if (n_mc < 2) throw ContractViolation("minimizer_entropy: n_mc must be >= 2");
  check_model(post, grid);
  const int m = grid.size();
  std::vector<int> lv(static_cast<std::size_t>(m), post.levels());
  PathwiseSampler sampler(post, grid.points, std::move(lv), 0, m, n_mc, 0, rng);
  return sampler.baseline_entropy();
}

double expected_entropy_reduction(const LatentModel& post, std::span<const double> candidate,
                                  int level, const RepresenterGrid& grid, int n_fantasy,
                                  int n_mc, Rng& rng) {
  if (n_fantasy < 1) throw ContractViolation("expected_entropy_reduction: n_fantasy must be >= 1");
  if (n_mc < 2) throw ContractViolation("expected_entropy_reduction: n_mc must be >= 2");
  check_model(post, grid);
  if (static_cast<int>(candidate.size()) != post.dim()) {
    throw ContractViolation("candidate dimension mismatch");
  }
  if (level < 1 || level > post.levels()) throw ContractViolation("invalid fidelity level");
  const int m = grid.size();
  RowMatrix configs(m + 1, grid.dim());
  configs.topRows(m) = grid.points;
  for (int j = 0; j < grid.dim(); ++j) configs(m, j) = candidate[static_cast<std::size_t>(j)];
  std::vector<int> lv(static_cast<std::size_t>(m), post.levels());
  lv.push_back(level);
  PathwiseSampler sampler(post, std::move(configs), std::move(lv), 0, m, n_mc, n_fantasy, rng);
  const double h0 = sampler.baseline_entropy();
  const double h1 = sampler.conditional_entropy(m);
  return std::isnan(h1) ? 0.0 : h0 - h1;
}

std::vector<double> all_gains(const LatentModel& post, const RepresenterGrid& grid,
                              const AcquisitionBudget& budget, Rng& rng) {
  if (budget.n_fantasy < 1 || budget.n_mc < 2) {
    throw ContractViolation("acquisition budget needs n_fantasy >= 1 and n_mc >= 2");
  }
  check_model(post, grid);
  const int m = grid.size();
  const int q = post.levels();
  RowMatrix configs(q * m, grid.dim());
  std::vector<int> lv;
  lv.reserve(static_cast<std::size_t>(q * m));
  for (int l = 1; l <= q; ++l) {
    configs.middleRows((l - 1) * m, m) = grid.points;
    lv.insert(lv.end(), static_cast<std::size_t>(m), l);
  }
  PathwiseSampler sampler(post, std::move(configs), std::move(lv), (q - 1) * m, m, budget.n_mc,
                          budget.n_fantasy, rng);
  const double h0 = sampler.baseline_entropy();
  std::vector<double> gains(static_cast<std::size_t>(q * m));
  for (int c = 0; c < q * m; ++c) {
    const double h1 = sampler.conditional_entropy(c);
    gains[static_cast<std::size_t>(c)] = std::isnan(h1) ? 0.0 : h0 - h1;
  }
  return gains;
}

AcquisitionDecision select_next(const LatentModel& post, const RepresenterGrid& grid,
                                std::span<const double> costs, const AcquisitionBudget& budget,
                                Rng& rng) {
  const int q = post.levels();
  if (static_cast<int>(costs.size()) != q) {
    throw ContractViolation("select_next: one cost per fidelity level required");
  }
  for (int l = 0; l < q; ++l) {
    if (!(costs[static_cast<std::size_t>(l)] > 0.0)) throw ContractViolation("costs must be positive");
    if (l > 0 && costs[static_cast<std::size_t>(l)] < costs[static_cast<std::size_t>(l - 1)]) {
      throw ContractViolation("costs must be non-decreasing in fidelity");
    }
  }
  const std::vector<double> gains = all_gains(post, grid, budget, rng);
  const int m = grid.size();
  AcquisitionDecision best;
  bool have = false;
  for (int l = q; l >= 1; --l) {
    for (int j = 0; j < m; ++j) {
      const double g = gains[static_cast<std::size_t>((l - 1) * m + j)];
      const double score = g / costs[static_cast<std::size_t>(l - 1)];
      if (!have || score > best.score) {
        best.level = l;
        best.grid_index = j;
        best.score = score;
        best.raw_gain = g;
        have = true;
      }
    }
  }
  best.config.assign(grid.points.row(best.grid_index).data(),
                     grid.points.row(best.grid_index).data() + grid.dim());
  return best;
}

std::vector<double> random_select(const EnvBox& box, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> e(box.size());
  for (std::size_t j = 0; j < box.size(); ++j) {
    const auto& d = box.dims[j];
    const double t = u(rng);
    e[j] = d.lower == d.upper ? d.lower : d.lower + t * (d.upper - d.lower);
  }
  return e;
}

}  // namespace mfbo
