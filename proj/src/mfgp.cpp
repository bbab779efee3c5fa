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

#include "mfbo/mfgp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfbo/errors.hpp"
#include "mfbo/simd/kernels.hpp"

namespace mfbo {

namespace {

bool same_row(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
  for (Eigen::Index k = 0; k < a.cols(); ++k)
    if (a(i, k) != b(j, k)) return false;
  return true;
}

Eigen::Index find_row(const RowMatrix& haystack, const RowMatrix& needle, Eigen::Index row) {
  for (Eigen::Index i = 0; i < haystack.rows(); ++i)
    if (same_row(haystack, i, needle, row)) return i;
  return -1;
}

KernelParams default_params(int dim) {
  KernelParams p;
  p.signal_variance = 1.0;
  p.lengthscales.assign(static_cast<std::size_t>(dim), 0.5);
  p.noise_variance = 1e-4;
  return p;
}

}  // namespace

int MFDataset::total_size() const {
  int n = 0;
  for (const auto& d : levels) n += d.size();
  return n;
}

void MFDataset::validate() const {
  if (levels.empty()) throw ContractViolation("MFDataset needs at least one level");
  if (level_costs.size() != levels.size()) {
    throw ContractViolation("MFDataset: one cost per level required");
  }
  for (std::size_t i = 0; i < level_costs.size(); ++i) {
    if (!(level_costs[i] > 0.0)) throw ContractViolation("level costs must be positive");
    if (i > 0 && !(level_costs[i] > level_costs[i - 1])) {
      throw ContractViolation("level costs must be strictly increasing");
    }
  }
  for (const auto& d : levels) {
    if (d.dim() != dim()) throw ContractViolation("MFDataset: levels disagree on dimension");
    d.validate();
  }
}

bool MFDataset::nested() const {
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const auto& hi = levels[i].configs;
    for (Eigen::Index r = 0; r < hi.rows(); ++r)
      if (find_row(levels[i - 1].configs, hi, r) < 0) return false;
  }
  return true;
}

void MFDataset::append_nested(int level, std::span<const double> config, double y) {
  if (level < 1 || level > num_levels()) throw ContractViolation("append_nested: invalid level");
  if (level > 1) {
    RowMatrix probe(1, static_cast<Eigen::Index>(config.size()));
    for (std::size_t j = 0; j < config.size(); ++j) probe(0, static_cast<Eigen::Index>(j)) = config[j];
    if (probe.cols() != dim() || find_row(levels[static_cast<std::size_t>(level - 2)].configs, probe, 0) < 0) {
      throw ContractViolation("append_nested: configuration missing from level " +
                              std::to_string(level - 1));
    }
  }
  levels[static_cast<std::size_t>(level - 1)].append(config, y);
}

void MFParams::validate(std::size_t dim) const {
  if (eta.size() != gaps.size()) throw ContractViolation("MFParams: one eta per gap process");
  for (double e : eta)
    if (!std::isfinite(e)) throw ContractViolation("MFParams: eta must be finite");
  base.validate(dim);
  for (const auto& g : gaps) g.validate(dim);
}

const KernelParams& MFParams::level_noise_params(int level) const {
  if (level < 1 || level > num_levels()) throw ContractViolation("invalid fidelity level");
  return level == 1 ? base : gaps[static_cast<std::size_t>(level - 2)];
}

double joint_kernel(std::span<const double> e, int i, std::span<const double> e_prime, int j,
                    const MFParams& params) {
  const int q = params.num_levels();
  if (i < 1 || i > q || j < 1 || j > q) throw ContractViolation("joint_kernel: invalid level");
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  double c = rbf_kernel(e, e_prime, params.base);
  for (int l = 2; l <= lo; ++l) {
    const double eta = params.eta[static_cast<std::size_t>(l - 2)];
    c = eta * eta * c + rbf_kernel(e, e_prime, params.gaps[static_cast<std::size_t>(l - 2)]);
  }
  for (int l = lo + 1; l <= hi; ++l) c *= params.eta[static_cast<std::size_t>(l - 2)];
  return c;
}

MFGPPosterior::MFGPPosterior(MFDataset data, MFParams params)
    : data_(std::move(data)), params_(std::move(params)) {
  data_.validate();
  dim_ = data_.dim();
  params_.validate(static_cast<std::size_t>(dim_));
  if (params_.num_levels() != data_.num_levels()) {
    throw ContractViolation("MFGPPosterior: parameter and data level counts differ");
  }
  const int n = data_.total_size();
  train_x_.resize(n, dim_);
  train_y_.resize(n);
  train_levels_.reserve(static_cast<std::size_t>(n));
  int row = 0;
  for (int l = 0; l < data_.num_levels(); ++l) {
    const auto& d = data_.levels[static_cast<std::size_t>(l)];
    for (int r = 0; r < d.size(); ++r, ++row) {
      train_x_.row(row) = d.configs.row(r);
      train_y_(row) = d.observations(r);
      train_levels_.push_back(l + 1);
    }
  }
  if (n == 0) return;
  Eigen::MatrixXd k = prior_cov(train_x_, train_levels_, train_x_, train_levels_);
  for (int r = 0; r < n; ++r) k(r, r) += noise_variance(train_levels_[static_cast<std::size_t>(r)]);
  chol_ = cholesky_with_jitter(k, prior_scale()).lower;
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(train_y_);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

Eigen::MatrixXd MFGPPosterior::prior_cov(const RowMatrix& a, std::span<const int> la,
                                         const RowMatrix& b, std::span<const int> lb) const {
  const int q = levels();
  for (int l : la)
    if (l < 1 || l > q) throw ContractViolation("invalid fidelity level");
  for (int l : lb)
    if (l < 1 || l > q) throw ContractViolation("invalid fidelity level");
  Eigen::MatrixXd c = cross_kernel(a, b, params_.base);
  std::vector<Eigen::MatrixXd> gap_k;
  gap_k.reserve(static_cast<std::size_t>(q - 1));
  for (int l = 2; l <= q; ++l) gap_k.push_back(cross_kernel(a, b, params_.gaps[static_cast<std::size_t>(l - 2)]));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const int li = la[static_cast<std::size_t>(i)];
      const int lj = lb[static_cast<std::size_t>(j)];
      const int lo = std::min(li, lj);
      const int hi = std::max(li, lj);
      double v = c(i, j);
      for (int l = 2; l <= lo; ++l) {
        const double eta = params_.eta[static_cast<std::size_t>(l - 2)];
        v = eta * eta * v + gap_k[static_cast<std::size_t>(l - 2)](i, j);
      }
      for (int l = lo + 1; l <= hi; ++l) v *= params_.eta[static_cast<std::size_t>(l - 2)];
      c(i, j) = v;
    }
  }
  return c;
}

Prediction MFGPPosterior::predict(std::span<const double> e, int level) const {
  if (static_cast<int>(e.size()) != dim_) throw ContractViolation("predict: dimension mismatch");
  if (level < 1 || level > levels()) throw ContractViolation("predict: invalid level");
  RowMatrix q(1, dim_);
  for (int j = 0; j < dim_; ++j) q(0, j) = e[static_cast<std::size_t>(j)];
  const int lv[1] = {level};
  const double prior = prior_cov(q, lv, q, lv)(0, 0);
  const auto n = static_cast<std::size_t>(train_y_.size());
  if (n == 0) return {0.0, prior};
  Eigen::VectorXd k = prior_cov(q, lv, train_x_, train_levels_).row(0).transpose();
  const double mean = simd::dot(k.data(), alpha_.data(), n);
  chol_.triangularView<Eigen::Lower>().solveInPlace(k);
  const double var = prior - simd::dot(k.data(), k.data(), n);
  return {mean, std::max(var, 0.0)};
}

JointPrediction MFGPPosterior::joint(const RowMatrix& configs, std::span<const int> lv) const {
  if (configs.cols() != dim_) throw ContractViolation("joint: dimension mismatch");
  if (static_cast<Eigen::Index>(lv.size()) != configs.rows()) {
    throw ContractViolation("joint: one level per configuration required");
  }
  JointPrediction out;
  out.cov = prior_cov(configs, lv, configs, lv);
  if (train_y_.size() == 0) {
    out.mean = Eigen::VectorXd::Zero(configs.rows());
    return out;
  }
  Eigen::MatrixXd ks = prior_cov(train_x_, train_levels_, configs, lv);  // n x m
  out.mean = ks.transpose() * alpha_;
  chol_.triangularView<Eigen::Lower>().solveInPlace(ks);
  out.cov.noalias() -= ks.transpose() * ks;
  return out;
}

double MFGPPosterior::noise_variance(int level) const {
  return params_.level_noise_params(level).noise_variance;
}

double MFGPPosterior::prior_scale() const {
  double v = params_.base.signal_variance;
  for (std::size_t l = 0; l < params_.gaps.size(); ++l) {
    v = params_.eta[l] * params_.eta[l] * v + params_.gaps[l].signal_variance;
  }
  return v;
}

MFGPPosterior fit_mf_posterior(MFDataset data, MFParams params) {
  return MFGPPosterior(std::move(data), std::move(params));
}

Prediction predict(const MFGPPosterior& post, std::span<const double> e, int level) {
  return post.predict(e, level);
}

double estimate_eta(const Dataset& low, const Dataset& high) {
  if (low.dim() != high.dim()) throw ContractViolation("estimate_eta: dimension mismatch");
  double sxy = 0.0;
  double sxx = 0.0;
  int shared = 0;
  for (Eigen::Index r = 0; r < high.configs.rows(); ++r) {
    const Eigen::Index i = find_row(low.configs, high.configs, r);
    if (i < 0) continue;
    ++shared;
    sxy += low.observations(i) * high.observations(r);
    sxx += low.observations(i) * low.observations(i);
  }
  if (shared < 2) {
    throw InsufficientDataError("estimate_eta needs >= 2 shared configurations, got " +
                                std::to_string(shared));
  }
  if (sxx == 0.0) throw InsufficientDataError("estimate_eta: low-fidelity observations are all zero");
  return sxy / sxx;
}

MFParams fit_mf_hyperparams(const MFDataset& data, const HyperBounds& bounds,
                            const HyperFitOptions& opts) {
  data.validate();
  const int d = data.dim();
  MFParams params;
  const Dataset& first = data.levels.front();
  params.base = first.size() >= 2 ? optimize_hyperparams(first, bounds, opts) : default_params(d);

  for (int l = 2; l <= data.num_levels(); ++l) {
    const Dataset& lower = data.levels[static_cast<std::size_t>(l - 2)];
    const Dataset& upper = data.levels[static_cast<std::size_t>(l - 1)];
    double eta = 1.0;
    try {
      eta = estimate_eta(lower, upper);
    } catch (const InsufficientDataError&) {
      eta = 1.0;
    }

    // Lower-level predictor from the levels fitted so far.
    MFDataset below;
    below.levels.assign(data.levels.begin(), data.levels.begin() + (l - 1));
    below.level_costs.assign(data.level_costs.begin(), data.level_costs.begin() + (l - 1));
    const MFGPPosterior lower_post(std::move(below), params);

    Dataset residual(d);
    for (Eigen::Index r = 0; r < upper.configs.rows(); ++r) {
      const Eigen::Index i = find_row(lower.configs, upper.configs, r);
      const std::span<const double> cfg(upper.configs.row(r).data(), static_cast<std::size_t>(d));
      const double y_low = i >= 0 ? lower.observations(i) : lower_post.predict(cfg, l - 1).mean;
      residual.append(cfg, upper.observations(r) - eta * y_low);
    }
    params.eta.push_back(eta);
    params.gaps.push_back(residual.size() >= 2 ? optimize_hyperparams(residual, bounds, opts)
                                               : default_params(d));
  }
  return params;
}

}  // namespace mfbo
