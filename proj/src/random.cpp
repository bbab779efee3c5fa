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

#include "mfbo/random.hpp"

#include <boost/random/sobol.hpp>

#include <cmath>

namespace mfbo {

Eigen::MatrixXd sobol_points(int m, int d, int skip, const Eigen::VectorXd* shift) {
  Eigen::MatrixXd out(m, d);
  boost::random::sobol gen(static_cast<std::size_t>(d));
  gen.discard(static_cast<std::uintmax_t>(skip) * static_cast<std::uintmax_t>(d));
  const double scale = std::ldexp(1.0, -64);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) {
      double u = static_cast<double>(gen()) * scale;
      if (shift) {
        u += (*shift)(j);
        u -= std::floor(u);
      }
      out(i, j) = u;
    }
  }
  return out;
}

Eigen::MatrixXd scrambled_sobol(int m, int d, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd shift(d);
  for (int j = 0; j < d; ++j) shift(j) = unif(rng);
  return sobol_points(m, d, 0, &shift);
}

Eigen::VectorXd standard_normal_vector(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

Eigen::MatrixXd standard_normal_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(rows, cols);
  // Row-major fill so that draws are ordered sample by sample.
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) z(i, j) = normal(rng);
  return z;
}

}  // namespace mfbo
