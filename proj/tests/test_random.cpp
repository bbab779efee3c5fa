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

#include <set>

#include "mfbo/random.hpp"

namespace mfbo {
namespace {

TEST(DeriveSeed, DeterministicAndTagSensitive) {
  EXPECT_EQ(derive_seed(7, {1, 2}), derive_seed(7, {1, 2}));
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
  EXPECT_NE(derive_seed(7, {1}), derive_seed(8, {1}));
  EXPECT_EQ(derive_seed(3, {4}), mix64(mix64(3) ^ mix64(4)));
}

TEST(DeriveSeed, NoCollisionsOverSmallGrid) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s)
    for (std::uint64_t t = 0; t < 50; ++t) seen.insert(derive_seed(s, {3, t}));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Sobol, PointsInUnitCubeAndDistinct) {
  const Eigen::MatrixXd p = sobol_points(64, 5);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LT(p.maxCoeff(), 1.0);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < i; ++j) EXPECT_GT((p.row(i) - p.row(j)).norm(), 0.0);
}

TEST(Sobol, FirstPointsOfTheSequence) {
  const Eigen::MatrixXd p = sobol_points(3, 1);
  // The generator starts after the origin.
  EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
  EXPECT_TRUE(p(1, 0) == 0.25 || p(1, 0) == 0.75);
  EXPECT_DOUBLE_EQ(p(1, 0) + p(2, 0), 1.0);
}

TEST(Sobol, MarginalsAreBalanced) {
  const Eigen::MatrixXd p = sobol_points(256, 3);
  for (int j = 0; j < 3; ++j) {
    int low = 0;
    for (int i = 0; i < 256; ++i) low += p(i, j) < 0.5;
    EXPECT_NEAR(low, 128, 1);
  }
}

TEST(Sobol, ScrambledDependsOnSeed) {
  Rng a(1), b(1), c(2);
  const auto pa = scrambled_sobol(16, 3, a);
  const auto pb = scrambled_sobol(16, 3, b);
  const auto pc = scrambled_sobol(16, 3, c);
  EXPECT_EQ(pa, pb);
  EXPECT_NE(pa, pc);
  EXPECT_GE(pc.minCoeff(), 0.0);
  EXPECT_LT(pc.maxCoeff(), 1.0);
}

TEST(Normals, MomentsRoughlyStandard) {
  Rng rng(5);
  const Eigen::VectorXd z = standard_normal_vector(20000, rng);
  EXPECT_NEAR(z.mean(), 0.0, 0.03);
  EXPECT_NEAR((z.array() - z.mean()).square().mean(), 1.0, 0.04);
}

TEST(Normals, MatrixFillIsRowMajor) {
  Rng a(9), b(9);
  const Eigen::MatrixXd m = standard_normal_matrix(2, 3, a);
  const Eigen::VectorXd v = standard_normal_vector(6, b);
  EXPECT_DOUBLE_EQ(m(0, 1), v(1));
  EXPECT_DOUBLE_EQ(m(1, 0), v(3));
}

}  // namespace
}  // namespace mfbo
