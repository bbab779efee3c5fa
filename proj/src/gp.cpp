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

#include "mfbo/gp.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mfbo/errors.hpp"
#include "mfbo/simd/kernels.hpp"

namespace mfbo {

namespace {

std::vector<double> inverse_lengthscales(const KernelParams& p) {
  std::vector<double> inv(p.lengthscales.size());
  for (std::size_t j = 0; j < inv.size(); ++j) inv[j] = 1.0 / p.lengthscales[j];
  return inv;
}

inline double rbf_row(const double* a, const double* b, const double* inv_ls, std::size_t d,
                      double sv) {
  return sv * std::exp(-0.5 * simd::scaled_sq_dist(a, b, inv_ls, d));
}

}  // namespace

void KernelParams::validate(std::size_t dim) const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw ContractViolation("signal_variance must be positive and finite");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw ContractViolation("noise_variance must be non-negative and finite");
  }
  if (lengthscales.size() != dim) {
    throw ContractViolation("expected " + std::to_string(dim) + " lengthscales, got " +
                            std::to_string(lengthscales.size()));
  }
  for (double l : lengthscales) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ContractViolation("lengthscales must be positive");
  }
}

void Dataset::append(std::span<const double> config, double y) {
  if (static_cast<int>(config.size()) != dim()) {
    throw ContractViolation("dataset append: dimension mismatch");
  }
  const auto n = configs.rows();
  configs.conservativeResize(n + 1, Eigen::NoChange);
  for (int j = 0; j < dim(); ++j) configs(n, j) = config[static_cast<std::size_t>(j)];
  observations.conservativeResize(n + 1);
  observations(n) = y;
}

void Dataset::validate() const {
  if (configs.rows() != observations.size()) {
    throw ContractViolation("dataset: configs.rows != observations.size");
  }
  if (!configs.allFinite() || !observations.allFinite()) {
    throw ContractViolation("dataset: non-finite entries");
  }
}

double rbf_kernel(std::span<const double> e, std::span<const double> e_prime,
                  const KernelParams& params) {
  if (e.size() != e_prime.size() || e.size() != params.lengthscales.size()) {
    throw ContractViolation("rbf_kernel: dimension mismatch");
  }
  const auto inv = inverse_lengthscales(params);
  return rbf_row(e.data(), e_prime.data(), inv.data(), e.size(), params.signal_variance);
}

Eigen::MatrixXd kernel_matrix(const RowMatrix& configs, const KernelParams& params) {
  const auto n = configs.rows();
  const auto d = static_cast<std::size_t>(configs.cols());
  if (params.lengthscales.size() != d) throw ContractViolation("kernel_matrix: dimension mismatch");
  const auto inv = inverse_lengthscales(params);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = params.signal_variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v =
          rbf_row(configs.row(i).data(), configs.row(j).data(), inv.data(), d, params.signal_variance);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd cross_kernel(const RowMatrix& a, const RowMatrix& b, const KernelParams& params) {
  const auto d = static_cast<std::size_t>(a.cols());
  if (b.cols() != a.cols() || params.lengthscales.size() != d) {
    throw ContractViolation("cross_kernel: dimension mismatch");
  }
  const auto inv = inverse_lengthscales(params);
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = rbf_row(a.row(i).data(), b.row(j).data(), inv.data(), d, params.signal_variance);
  return k;
}

CholeskyResult cholesky_with_jitter(const Eigen::MatrixXd& a, double scale) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};
  for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    const double jitter = rel * scale;
    Eigen::MatrixXd b = a;
    b.diagonal().array() += jitter;
    llt.compute(b);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
  }
  throw SingularModelError("covariance not positive definite after jitter escalation");
}

Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& cov, double scale) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd d = ldlt.vectorD();
    if (d.minCoeff() >= -1e-8 * scale) {
      d = d.cwiseMax(0.0).cwiseSqrt();
      Eigen::MatrixXd lower = ldlt.matrixL();
      Eigen::MatrixXd s = lower * d.asDiagonal();
      return ldlt.transpositionsP().transpose() * s;
    }
  }
  return cholesky_with_jitter(cov, scale).lower;
}

RowMatrix sample_gaussian(const JointPrediction& dist, int n_samples, double scale, Rng& rng) {
  const auto m = static_cast<int>(dist.mean.size());
  if (m < 1 || n_samples < 1) throw ContractViolation("sample_gaussian: need m >= 1 and n >= 1");
  const Eigen::MatrixXd s = covariance_sqrt(dist.cov, scale);
  const Eigen::MatrixXd z = standard_normal_matrix(n_samples, m, rng);
  RowMatrix out = z * s.transpose();
  out.rowwise() += dist.mean.transpose();
  return out;
}

GPPosterior::GPPosterior(Dataset data, KernelParams params)
    : data_(std::move(data)), params_(std::move(params)), dim_(data_.dim()) {
  data_.validate();
  params_.validate(static_cast<std::size_t>(dim_));
  if (data_.empty()) {
    chol_.resize(0, 0);
    alpha_.resize(0);
    return;
  }
  Eigen::MatrixXd k = kernel_matrix(data_.configs, params_);
  k.diagonal().array() += params_.noise_variance;
  auto fact = cholesky_with_jitter(k, params_.signal_variance);
  chol_ = std::move(fact.lower);
  jitter_ = fact.jitter;
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(data_.observations);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

Prediction GPPosterior::mean_var(std::span<const double> e) const {
  if (static_cast<int>(e.size()) != dim_) throw ContractViolation("predict: dimension mismatch");
  const double sv = params_.signal_variance;
  if (data_.empty()) return {0.0, sv};
  const auto n = data_.size();
  const auto inv = inverse_lengthscales(params_);
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i)
    k(i) = rbf_row(e.data(), data_.configs.row(i).data(), inv.data(), e.size(), sv);
  const double mean = simd::dot(k.data(), alpha_.data(), static_cast<std::size_t>(n));
  chol_.triangularView<Eigen::Lower>().solveInPlace(k);
  const double var = sv - simd::dot(k.data(), k.data(), static_cast<std::size_t>(n));
  return {mean, std::max(var, 0.0)};
}

Prediction GPPosterior::predict(std::span<const double> e, int level) const {
  if (level != 1) throw ContractViolation("single-fidelity model only has level 1");
  return mean_var(e);
}

JointPrediction GPPosterior::joint(const RowMatrix& configs, std::span<const int> levels) const {
  if (configs.cols() != dim_) throw ContractViolation("joint: dimension mismatch");
  if (static_cast<Eigen::Index>(levels.size()) != configs.rows()) {
    throw ContractViolation("joint: one level per configuration required");
  }
  for (int l : levels)
    if (l != 1) throw ContractViolation("single-fidelity model only has level 1");
  JointPrediction out;
  out.cov = kernel_matrix(configs, params_);
  if (data_.empty()) {
    out.mean = Eigen::VectorXd::Zero(configs.rows());
    return out;
  }
  Eigen::MatrixXd ks = cross_kernel(data_.configs, configs, params_);  // n x m
  out.mean = ks.transpose() * alpha_;
  chol_.triangularView<Eigen::Lower>().solveInPlace(ks);
  out.cov.noalias() -= ks.transpose() * ks;
  return out;
}

double GPPosterior::noise_variance(int level) const {
  if (level != 1) throw ContractViolation("single-fidelity model only has level 1");
  return params_.noise_variance;
}

double GPPosterior::log_marginal_likelihood() const {
  const auto n = data_.size();
  if (n == 0) return 0.0;
  return -0.5 * data_.observations.dot(alpha_) - chol_.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

GPPosterior fit_posterior(Dataset dataset, KernelParams params) {
  return GPPosterior(std::move(dataset), std::move(params));
}

Prediction posterior_mean_var(const GPPosterior& post, std::span<const double> e) {
  return post.mean_var(e);
}

double log_marginal_likelihood(const Dataset& data, const KernelParams& params) {
  const auto n = data.size();
  if (n == 0) return 0.0;
  Eigen::MatrixXd k = kernel_matrix(data.configs, params);
  k.diagonal().array() += params.noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = llt.solve(data.observations);
  const Eigen::MatrixXd l = llt.matrixL();
  const double lml = -0.5 * data.observations.dot(alpha) - l.diagonal().array().log().sum() -
                     0.5 * n * std::log(2.0 * std::numbers::pi);
  return std::isfinite(lml) ? lml : -std::numeric_limits<double>::infinity();
}

namespace {

// Packs KernelParams into log-space coordinates: [log sv, log l_1..d, log noise].
struct LogBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  LogBox(const HyperBounds& b, int d) : lower(d + 2), upper(d + 2) {
    lower(0) = std::log(b.signal_variance.lower);
    upper(0) = std::log(b.signal_variance.upper);
    for (int j = 0; j < d; ++j) {
      lower(1 + j) = std::log(b.lengthscale.lower);
      upper(1 + j) = std::log(b.lengthscale.upper);
    }
    lower(d + 1) = std::log(b.noise_variance.lower);
    upper(d + 1) = std::log(b.noise_variance.upper);
  }

  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }
};

KernelParams unpack(const Eigen::VectorXd& x, int d) {
  KernelParams p;
  p.signal_variance = std::exp(x(0));
  p.lengthscales.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) p.lengthscales[static_cast<std::size_t>(j)] = std::exp(x(1 + j));
  p.noise_variance = std::exp(x(d + 1));
  return p;
}

struct Vertex {
  Eigen::VectorXd x;
  double f;  // negative log marginal likelihood
};

// Nelder-Mead on a box: every trial point is clamped into the box first.
Vertex nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const LogBox& box,
                   const Eigen::VectorXd& start, int max_evals) {
  const auto p = start.size();
  std::vector<Vertex> simplex;
  simplex.reserve(static_cast<std::size_t>(p + 1));
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return Vertex{x, f(x)};
  };
  simplex.push_back(eval(box.clamp(start)));
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::VectorXd x = simplex[0].x;
    const double step = 0.15 * (box.upper(j) - box.lower(j));
    x(j) = (x(j) + step <= box.upper(j)) ? x(j) + step : x(j) - step;
    simplex.push_back(eval(box.clamp(x)));
  }
  auto by_f = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };

  while (evals < max_evals) {
    std::stable_sort(simplex.begin(), simplex.end(), by_f);
    if (std::abs(simplex.back().f - simplex.front().f) < 1e-9 * (1.0 + std::abs(simplex.front().f)))
      break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < p; ++i) centroid += simplex[static_cast<std::size_t>(i)].x;
    centroid /= static_cast<double>(p);
    Vertex& worst = simplex.back();

    Vertex refl = eval(box.clamp(centroid + (centroid - worst.x)));
    if (refl.f < simplex.front().f) {
      Vertex exp = eval(box.clamp(centroid + 2.0 * (centroid - worst.x)));
      worst = exp.f < refl.f ? exp : refl;
    } else if (refl.f < simplex[static_cast<std::size_t>(p - 1)].f) {
      worst = refl;
    } else {
      const bool outside = refl.f < worst.f;
      Vertex con = outside ? eval(box.clamp(centroid + 0.5 * (refl.x - centroid)))
                           : eval(box.clamp(centroid + 0.5 * (worst.x - centroid)));
      if (con.f < std::min(refl.f, worst.f)) {
        worst = con;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i)
          simplex[i] = eval(simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x));
      }
    }
  }
  return *std::min_element(simplex.begin(), simplex.end(), by_f);
}

}  // namespace

KernelParams optimize_hyperparams(const Dataset& dataset, const HyperBounds& bounds,
                                  const HyperFitOptions& opts) {
  dataset.validate();
  if (dataset.size() < 2) throw InsufficientDataError("optimize_hyperparams needs >= 2 points");
  const int d = dataset.dim();
  const LogBox box(bounds, d);
  const auto objective = [&](const Eigen::VectorXd& x) {
    const double lml = log_marginal_likelihood(dataset, unpack(x, d));
    return std::isfinite(lml) ? -lml : std::numeric_limits<double>::infinity();
  };

  const Eigen::MatrixXd starts = sobol_points(opts.n_starts, d + 2, 1);
  Vertex best{Eigen::VectorXd(), std::numeric_limits<double>::infinity()};
  for (int s = 0; s < opts.n_starts; ++s) {
    Eigen::VectorXd x0 =
        box.lower.array() + starts.row(s).transpose().array() * (box.upper - box.lower).array();
    const Vertex v = nelder_mead(objective, box, x0, opts.max_evals_per_start);
    if (v.f < best.f) best = v;
  }
  if (!std::isfinite(best.f)) {
    throw SingularModelError("optimize_hyperparams: no start produced a factorizable model");
  }
  return unpack(best.x, d);
}

RowMatrix sample_posterior(const GPPosterior& post, const RowMatrix& candidates, int n_samples,
                           Rng& rng) {
  const std::vector<int> levels(static_cast<std::size_t>(candidates.rows()), 1);
  return sample_gaussian(post.joint(candidates, levels), n_samples, post.prior_scale(), rng);
}

}  // namespace mfbo
