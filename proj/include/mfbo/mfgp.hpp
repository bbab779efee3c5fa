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

// Auto-regressive multi-fidelity GP (recursive co-kriging).
//
//   f_1(e) ~ GP(0, k_1)
//   f_i(e) = eta_i * f_{i-1}(e) + gap_i(e),   gap_i ~ GP(0, k_gap_i)
//
// with the gap processes independent of everything below them. Levels are
// 1-based and ordered by increasing fidelity (and cost).

#ifndef MFBO_MFGP_HPP_
#define MFBO_MFGP_HPP_

#include <span>
#include <vector>

#include "mfbo/gp.hpp"

namespace mfbo {

struct MFDataset {
  std::vector<Dataset> levels;      // index 0 is level 1
  std::vector<double> level_costs;  // strictly increasing

  int num_levels() const { return static_cast<int>(levels.size()); }
  int dim() const { return levels.empty() ? 0 : levels.front().dim(); }
  int total_size() const;

  void validate() const;
  // True when every configuration of level i+1 also appears at level i.
  bool nested() const;
  // Appends an observation only if the result stays nested; otherwise
  // throws ContractViolation.
  void append_nested(int level, std::span<const double> config, double y);
};

struct MFParams {
  std::vector<double> eta;         // eta_2 .. eta_q
  KernelParams base;               // k_1, with the level-1 noise
  std::vector<KernelParams> gaps;  // k_gap_2 .. k_gap_q, each with its level's noise

  int num_levels() const { return static_cast<int>(gaps.size()) + 1; }
  void validate(std::size_t dim) const;
  const KernelParams& level_noise_params(int level) const;
};

// Prior covariance between f_i(e) and f_j(e').
double joint_kernel(std::span<const double> e, int i, std::span<const double> e_prime, int j,
                    const MFParams& params);

class MFGPPosterior final : public LatentModel {
 public:
  MFGPPosterior(MFDataset data, MFParams params);

  int levels() const override { return params_.num_levels(); }
  int dim() const override { return dim_; }
  Prediction predict(std::span<const double> e, int level) const override;
  JointPrediction joint(const RowMatrix& configs, std::span<const int> levels) const override;
  double noise_variance(int level) const override;
  double prior_scale() const override;

  // Prior covariance block between two batches of (config, level) pairs.
  Eigen::MatrixXd prior_cov(const RowMatrix& a, std::span<const int> la, const RowMatrix& b,
                            std::span<const int> lb) const;

  const MFDataset& dataset() const { return data_; }
  const MFParams& params() const { return params_; }
  const RowMatrix& train_configs() const { return train_x_; }
  const std::vector<int>& train_levels() const { return train_levels_; }
  const Eigen::VectorXd& train_observations() const { return train_y_; }

 private:
  MFDataset data_;
  MFParams params_;
  int dim_ = 0;
  RowMatrix train_x_;
  std::vector<int> train_levels_;
  Eigen::VectorXd train_y_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
};

MFGPPosterior fit_mf_posterior(MFDataset data, MFParams params);

Prediction predict(const MFGPPosterior& post, std::span<const double> e, int level);

// Least squares through the origin over configurations shared by the two
// datasets: argmin_eta sum (y_high - eta * y_low)^2. Throws
// InsufficientDataError with fewer than two shared configurations.
double estimate_eta(const Dataset& low, const Dataset& high);

// Full hyperparameter fit: k_1 on level-1 data, then for each higher level
// eta by shared-design least squares (1.0 when fewer than two shared
// designs) and the gap kernel on residuals y_i - eta * yhat_{i-1}, where
// yhat is the lower-level observation at shared designs and the lower-level
// posterior mean elsewhere.
MFParams fit_mf_hyperparams(const MFDataset& data, const HyperBounds& bounds = {},
                            const HyperFitOptions& opts = {});

}  // namespace mfbo

#endif  // MFBO_MFGP_HPP_
