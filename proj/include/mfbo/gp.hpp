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

// Exact Gaussian-process regression with a squared-exponential (ARD) kernel.
//
// All inputs are expected in the normalized unit box; the harness maps raw
// environment configurations there before they reach the model.

#ifndef MFBO_GP_HPP_
#define MFBO_GP_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mfbo/random.hpp"

namespace mfbo {

// Row-major so that each configuration (and each posterior sample) is
// contiguous in memory.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct KernelParams {
  double signal_variance = 1.0;
  std::vector<double> lengthscales;
  double noise_variance = 0.0;

  // Throws ContractViolation on a broken invariant or a dimension mismatch.
  void validate(std::size_t dim) const;
};

struct Dataset {
  RowMatrix configs;  // n x d
  Eigen::VectorXd observations;

  Dataset() = default;
  Dataset(RowMatrix c, Eigen::VectorXd y) : configs(std::move(c)), observations(std::move(y)) {}
  explicit Dataset(int dim) : configs(0, dim) {}

  int size() const { return static_cast<int>(configs.rows()); }
  int dim() const { return static_cast<int>(configs.cols()); }
  bool empty() const { return configs.rows() == 0; }
  void append(std::span<const double> config, double y);
  void validate() const;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

// Mean vector and covariance of the latent process over a batch of queries.
struct JointPrediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Read-only view of a fitted surrogate, shared by the single- and
// multi-fidelity posteriors. Levels are 1-based; level `levels()` is the
// top (highest) fidelity.
class LatentModel {
 public:
  virtual ~LatentModel() = default;
  virtual int levels() const = 0;
  virtual int dim() const = 0;
  virtual Prediction predict(std::span<const double> e, int level) const = 0;
  virtual JointPrediction joint(const RowMatrix& configs, std::span<const int> levels) const = 0;
  virtual double noise_variance(int level) const = 0;
  // Prior variance scale of the top level; used to size the jitter ladder.
  virtual double prior_scale() const = 0;
};

double rbf_kernel(std::span<const double> e, std::span<const double> e_prime,
                  const KernelParams& params);

Eigen::MatrixXd kernel_matrix(const RowMatrix& configs, const KernelParams& params);

// a.rows() x b.rows() cross-covariance.
Eigen::MatrixXd cross_kernel(const RowMatrix& a, const RowMatrix& b, const KernelParams& params);

// Lower Cholesky factor of `a`, escalating a diagonal jitter from
// 1e-10*scale by x10 up to 1e-4*scale. Throws SingularModelError.
struct CholeskyResult {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};
CholeskyResult cholesky_with_jitter(const Eigen::MatrixXd& a, double scale);

// Square-root factor S with S*S^T == cov (to factorization accuracy) for a
// positive semi-definite covariance. Tries a plain Cholesky, then a pivoted
// LDL^T with tiny negative pivots clamped, then the jitter ladder.
Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& cov, double scale);

// n_samples x m draws from N(mean, cov); row i uses the i-th block of
// standard normals taken from `rng`.
RowMatrix sample_gaussian(const JointPrediction& dist, int n_samples, double scale, Rng& rng);

class GPPosterior final : public LatentModel {
 public:
  GPPosterior(Dataset data, KernelParams params);

  int levels() const override { return 1; }
  int dim() const override { return dim_; }
  Prediction predict(std::span<const double> e, int level) const override;
  JointPrediction joint(const RowMatrix& configs, std::span<const int> levels) const override;
  double noise_variance(int level) const override;
  double prior_scale() const override { return params_.signal_variance; }

  Prediction mean_var(std::span<const double> e) const;
  double log_marginal_likelihood() const;

  const Dataset& dataset() const { return data_; }
  const KernelParams& params() const { return params_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }

 private:
  Dataset data_;
  KernelParams params_;
  int dim_ = 0;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

GPPosterior fit_posterior(Dataset dataset, KernelParams params);

Prediction posterior_mean_var(const GPPosterior& post, std::span<const double> e);

struct Interval {
  double lower;
  double upper;
};

struct HyperBounds {
  Interval signal_variance{1e-3, 10.0};
  Interval lengthscale{0.05, 5.0};
  Interval noise_variance{1e-6, 1e-1};
};

struct HyperFitOptions {
  int n_starts = 8;
  int max_evals_per_start = 400;
};

// Log marginal likelihood of `data` under `params`; -inf if unfactorizable.
double log_marginal_likelihood(const Dataset& data, const KernelParams& params);

// Multi-start Nelder-Mead over log-parameters inside `bounds`.
KernelParams optimize_hyperparams(const Dataset& dataset, const HyperBounds& bounds = {},
                                  const HyperFitOptions& opts = {});

RowMatrix sample_posterior(const GPPosterior& post, const RowMatrix& candidates, int n_samples,
                           Rng& rng);

}  // namespace mfbo

#endif  // MFBO_GP_HPP_
