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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfbo/errors.hpp"
#include "mfbo/gp.hpp"
#include "mfbo/random.hpp"

namespace mfbo {
namespace {

KernelParams params(int d, double sv, double ls, double noise) {
  KernelParams p;
  p.signal_variance = sv;
  p.lengthscales.assign(static_cast<std::size_t>(d), ls);
  p.noise_variance = noise;
  return p;
}

RowMatrix uniform_rows(int n, int d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RowMatrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

std::span<const double> row(const RowMatrix& m, int i) {
  return {m.row(i).data(), static_cast<std::size_t>(m.cols())};
}

// Explicit-inverse reference for the posterior at one probe.
Prediction dense_oracle(const RowMatrix& x, const Eigen::VectorXd& y, const KernelParams& p,
                        std::span<const double> e) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd ks(n);
  for (int i = 0; i < n; ++i) {
    ks(i) = rbf_kernel(e, row(x, i), p);
    for (int j = 0; j < n; ++j) k(i, j) = rbf_kernel(row(x, i), row(x, j), p);
  }
  k.diagonal().array() += p.noise_variance;
  const Eigen::MatrixXd kinv = k.inverse();
  return {ks.dot(kinv * y), p.signal_variance - ks.dot(kinv * ks)};
}

TEST(RbfKernel, ZeroDistanceGivesSignalVariance) {
  const auto p = params(2, 2.0, 0.7, 0.0);
  const std::vector<double> e{0.3, -0.4};
  EXPECT_DOUBLE_EQ(rbf_kernel(e, e, p), 2.0);
}

TEST(RbfKernel, ClosedFormAtUnitOffset) {
  const auto p = params(2, 1.0, 1.0, 0.0);
  const std::vector<double> a{0, 0}, b{1, 1};
  EXPECT_NEAR(rbf_kernel(a, b, p), 0.36787944117144233, 1e-15);
}

TEST(RbfKernel, DecaysMonotonicallyToZero) {
  const auto p = params(1, 1.5, 0.3, 0.0);
  const std::vector<double> o{0.0};
  double prev = rbf_kernel(o, o, p);
  for (double t = 0.1; t < 20.0; t *= 1.7) {
    const std::vector<double> e{t};
    const double k = rbf_kernel(o, e, p);
    EXPECT_LT(k, prev);
    prev = k;
  }
  EXPECT_LT(prev, 1e-100);
}

TEST(RbfKernel, SymmetricExactly) {
  Rng rng(1);
  const auto x = uniform_rows(20, 4, rng);
  auto p = params(4, 1.3, 0.4, 0.0);
  p.lengthscales = {0.2, 0.5, 1.0, 3.0};
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) EXPECT_EQ(rbf_kernel(row(x, i), row(x, j), p), rbf_kernel(row(x, j), row(x, i), p));
}

TEST(RbfKernel, DimensionMismatchThrows) {
  const auto p = params(2, 1.0, 1.0, 0.0);
  const std::vector<double> a{0, 0, 0};
  EXPECT_THROW(rbf_kernel(a, a, p), ContractViolation);
}

TEST(KernelMatrix, SingleAndDuplicateRows) {
  const auto p = params(2, 3.0, 0.5, 0.0);
  RowMatrix one(1, 2);
  one << 0.1, 0.2;
  EXPECT_EQ(kernel_matrix(one, p)(0, 0), 3.0);
  RowMatrix two(2, 2);
  two << 0.1, 0.2, 0.1, 0.2;
  EXPECT_TRUE((kernel_matrix(two, p).array() == 3.0).all());
}

TEST(KernelMatrix, PositiveSemiDefinite) {
  Rng rng(2);
  const auto p = params(3, 1.7, 0.3, 0.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd k = kernel_matrix(uniform_rows(5, 3, rng), p);
    EXPECT_EQ(k, k.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * p.signal_variance);
  }
}

TEST(KernelParams, ValidateRejectsBadValues) {
  auto p = params(2, 1.0, 1.0, 0.0);
  EXPECT_NO_THROW(p.validate(2));
  EXPECT_THROW(p.validate(3), ContractViolation);
  p.signal_variance = 0.0;
  EXPECT_THROW(p.validate(2), ContractViolation);
  p = params(2, 1.0, 1.0, -1e-9);
  EXPECT_THROW(p.validate(2), ContractViolation);
  p = params(2, 1.0, 0.0, 0.0);
  EXPECT_THROW(p.validate(2), ContractViolation);
}

TEST(Posterior, EmptyDatasetIsThePrior) {
  const GPPosterior post(Dataset(2), params(2, 2.5, 0.3, 0.01));
  const std::vector<double> e{0.2, 0.9};
  const Prediction pr = posterior_mean_var(post, e);
  EXPECT_EQ(pr.mean, 0.0);
  EXPECT_EQ(pr.variance, 2.5);
}

TEST(Posterior, NoiseFreeInterpolationAtTrainingPoint) {
  Dataset data(2);
  const std::vector<double> e{0.4, 0.6};
  data.append(e, 1.7);
  const GPPosterior post(data, params(2, 1.0, 0.5, 0.0));
  const Prediction pr = posterior_mean_var(post, e);
  EXPECT_NEAR(pr.mean, 1.7, 1e-12);
  EXPECT_NEAR(pr.variance, 0.0, 1e-12);
  EXPECT_GE(pr.variance, 0.0);
}

TEST(Posterior, MatchesExplicitInverseOracle) {
  Rng rng(3);
  std::normal_distribution<double> nd;
  const auto p = params(3, 1.2, 0.4, 0.01);
  const auto x = uniform_rows(10, 3, rng);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) y(i) = nd(rng);
  const GPPosterior post(Dataset(x, y), p);
  const auto probes = uniform_rows(20, 3, rng);
  for (int i = 0; i < 20; ++i) {
    const Prediction got = posterior_mean_var(post, row(probes, i));
    const Prediction ref = dense_oracle(x, y, p, row(probes, i));
    EXPECT_NEAR(got.mean, ref.mean, 1e-8);
    EXPECT_NEAR(got.variance, ref.variance, 1e-8);
  }
}

TEST(Posterior, VarianceShrinksWithMoreData) {
  Rng rng(4);
  std::normal_distribution<double> nd;
  const auto p = params(2, 1.0, 0.3, 0.05);
  const auto x = uniform_rows(12, 2, rng);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) y(i) = nd(rng);
  const GPPosterior small(Dataset(x.topRows(6), y.head(6)), p);
  const GPPosterior large(Dataset(x, y), p);
  const auto probes = uniform_rows(50, 2, rng);
  for (int i = 0; i < 50; ++i) {
    EXPECT_LE(large.mean_var(row(probes, i)).variance,
              small.mean_var(row(probes, i)).variance + 1e-8);
  }
}

TEST(Posterior, JointAgreesWithPointwise) {
  Rng rng(5);
  std::normal_distribution<double> nd;
  const auto p = params(2, 0.8, 0.3, 1e-3);
  const auto x = uniform_rows(7, 2, rng);
  Eigen::VectorXd y(7);
  for (int i = 0; i < 7; ++i) y(i) = nd(rng);
  const GPPosterior post(Dataset(x, y), p);
  const auto q = uniform_rows(5, 2, rng);
  const std::vector<int> levels(5, 1);
  const JointPrediction jp = post.joint(q, levels);
  for (int i = 0; i < 5; ++i) {
    const Prediction pr = post.mean_var(row(q, i));
    EXPECT_NEAR(jp.mean(i), pr.mean, 1e-12);
    EXPECT_NEAR(jp.cov(i, i), pr.variance, 1e-12);
  }
}

TEST(Posterior, LogMarginalLikelihoodMatchesClosedForm) {
  Rng rng(6);
  std::normal_distribution<double> nd;
  const auto p = params(2, 1.1, 0.6, 0.02);
  const auto x = uniform_rows(8, 2, rng);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) y(i) = nd(rng);
  Eigen::MatrixXd k = kernel_matrix(x, p);
  k.diagonal().array() += p.noise_variance;
  const double ref = -0.5 * y.dot(k.inverse() * y) - 0.5 * std::log(k.determinant()) -
                     4.0 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(log_marginal_likelihood(Dataset(x, y), p), ref, 1e-9);
  EXPECT_NEAR(GPPosterior(Dataset(x, y), p).log_marginal_likelihood(), ref, 1e-9);
}

TEST(Cholesky, JitterLadderRescuesSemidefinite) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 3);  // rank one
  a(0, 0) = a(1, 1) = a(2, 2) = 1.0;
  const CholeskyResult r = cholesky_with_jitter(a, 1.0);
  EXPECT_GE(r.jitter, 0.0);
  EXPECT_LE(r.jitter, 1e-4);
  const Eigen::MatrixXd back = r.lower * r.lower.transpose();
  EXPECT_LT((back - a).cwiseAbs().maxCoeff(), 1e-4 + 1e-12);
}

TEST(Cholesky, IndefiniteMatrixThrows) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(cholesky_with_jitter(a, 1.0), SingularModelError);
}

TEST(OptimizeHyperparams, RecoversLengthscaleOfGeneratingProcess) {
  Rng rng(7);
  const auto truth = params(1, 1.0, 0.5, 1e-4);
  double log_ratio = 0.0;
  const int reps = 5;
  for (int rep = 0; rep < reps; ++rep) {
    const auto x = uniform_rows(40, 1, rng);
    const std::vector<int> lv(40, 1);
    const GPPosterior prior(Dataset(1), truth);
    JointPrediction jp = prior.joint(x, lv);
    jp.cov.diagonal().array() += truth.noise_variance;
    const RowMatrix y = sample_gaussian(jp, 1, 1.0, rng);
    const KernelParams fit = optimize_hyperparams(Dataset(x, y.row(0).transpose()));
    log_ratio += std::log(fit.lengthscales[0] / 0.5);
  }
  EXPECT_LT(std::fabs(log_ratio / reps), std::log(2.0));
}

TEST(OptimizeHyperparams, ConstantDataDrivesSignalVarianceToFloor) {
  Rng rng(8);
  const auto x = uniform_rows(10, 2, rng);
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
  const HyperBounds b;
  const KernelParams fit = optimize_hyperparams(Dataset(x, y), b);
  EXPECT_NEAR(fit.signal_variance, b.signal_variance.lower, 1e-3 * b.signal_variance.lower);
}

TEST(OptimizeHyperparams, TwoPointsStayInsideBounds) {
  RowMatrix x(2, 2);
  x << 0.1, 0.2, 0.7, 0.9;
  Eigen::VectorXd y(2);
  y << 0.3, -0.5;
  const HyperBounds b;
  const KernelParams fit = optimize_hyperparams(Dataset(x, y), b);
  const double eps = 1e-12;
  EXPECT_GE(fit.signal_variance, b.signal_variance.lower * (1 - eps));
  EXPECT_LE(fit.signal_variance, b.signal_variance.upper * (1 + eps));
  EXPECT_GE(fit.noise_variance, b.noise_variance.lower * (1 - eps));
  EXPECT_LE(fit.noise_variance, b.noise_variance.upper * (1 + eps));
  for (double l : fit.lengthscales) {
    EXPECT_GE(l, b.lengthscale.lower * (1 - eps));
    EXPECT_LE(l, b.lengthscale.upper * (1 + eps));
  }
}

TEST(OptimizeHyperparams, NoWorseThanAnyStartPoint) {
  Rng rng(9);
  std::normal_distribution<double> nd;
  const int d = 2;
  const auto x = uniform_rows(15, d, rng);
  Eigen::VectorXd y(15);
  for (int i = 0; i < 15; ++i) y(i) = std::sin(6.0 * x(i, 0)) + 0.1 * nd(rng);
  const Dataset data(x, y);
  const HyperBounds b;
  const KernelParams fit = optimize_hyperparams(data, b);
  const double best = log_marginal_likelihood(data, fit);
  const Eigen::MatrixXd starts = sobol_points(8, d + 2, 1);
  auto lerp = [](Interval iv, double t) {
    return std::exp(std::log(iv.lower) + t * (std::log(iv.upper) - std::log(iv.lower)));
  };
  for (int s = 0; s < 8; ++s) {
    KernelParams p;
    p.signal_variance = lerp(b.signal_variance, starts(s, 0));
    for (int j = 0; j < d; ++j) p.lengthscales.push_back(lerp(b.lengthscale, starts(s, 1 + j)));
    p.noise_variance = lerp(b.noise_variance, starts(s, d + 1));
    EXPECT_GE(best, log_marginal_likelihood(data, p) - 1e-9);
  }
}

TEST(OptimizeHyperparams, OnePointIsInsufficient) {
  Dataset d(1);
  const std::vector<double> e{0.5};
  d.append(e, 1.0);
  EXPECT_THROW(optimize_hyperparams(d), InsufficientDataError);
}

TEST(SamplePosterior, PriorMeanWithinClt) {
  const GPPosterior post(Dataset(1), params(1, 2.0, 0.5, 0.0));
  RowMatrix c(1, 1);
  c << 0.5;
  Rng rng(10);
  const int n = 100000;
  const RowMatrix s = sample_posterior(post, c, n, rng);
  EXPECT_LT(std::fabs(s.mean()), 4.0 * std::sqrt(2.0 / n));
}

TEST(SamplePosterior, NoiseFreeTrainingPointIsPinned) {
  Rng rng(11);
  const auto x = uniform_rows(5, 2, rng);
  Eigen::VectorXd y(5);
  y << 0.3, -1.2, 0.8, 0.0, 2.0;
  const GPPosterior post(Dataset(x, y), params(2, 1.0, 0.4, 0.0));
  RowMatrix c(3, 2);
  c.row(0) = x.row(1);
  c.row(1) << 0.5, 0.5;
  c.row(2) = x.row(4);
  const RowMatrix s = sample_posterior(post, c, 500, rng);
  for (int i = 0; i < 500; ++i) {
    EXPECT_NEAR(s(i, 0), -1.2, 1e-6);
    EXPECT_NEAR(s(i, 2), 2.0, 1e-6);
  }
}

TEST(SamplePosterior, DeterministicUnderSeed) {
  Rng r0(12);
  const auto x = uniform_rows(4, 2, r0);
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(4, -1.0, 1.0);
  const GPPosterior post(Dataset(x, y), params(2, 1.0, 0.4, 1e-3));
  const auto c = uniform_rows(3, 2, r0);
  Rng a(99), b(99);
  EXPECT_EQ(sample_posterior(post, c, 10, a), sample_posterior(post, c, 10, b));
}

TEST(SamplePosterior, EmpiricalCovarianceMatchesPosterior) {
  Rng rng(13);
  const auto x = uniform_rows(4, 1, rng);
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(4, -1.0, 1.0);
  const GPPosterior post(Dataset(x, y), params(1, 1.0, 0.3, 0.01));
  RowMatrix c(2, 1);
  c << 0.2, 0.35;
  const std::vector<int> lv(2, 1);
  const JointPrediction jp = post.joint(c, lv);
  const int n = 40000;
  const RowMatrix s = sample_posterior(post, c, n, rng);
  const Eigen::RowVectorXd mu = s.colwise().mean();
  const Eigen::MatrixXd centered = s.rowwise() - mu;
  const Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(mu(i), jp.mean(i), 5.0 * std::sqrt(jp.cov(i, i) / n));
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(cov(i, j), jp.cov(i, j), 0.05 * jp.cov.diagonal().maxCoeff());
  }
}

}  // namespace
}  // namespace mfbo
