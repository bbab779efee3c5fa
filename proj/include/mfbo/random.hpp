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

#ifndef MFBO_RANDOM_HPP_
#define MFBO_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace mfbo {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent substream seed from a base seed and a path of tags.
// derive_seed(s, {a, b}) == mix64(mix64(s ^ mix64(a)) ^ mix64(b)).
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix64(base);
  for (std::uint64_t t : tags) s = mix64(s ^ mix64(t));
  return s;
}

// m x d matrix of Sobol points in [0,1)^d. When `shift` is non-null every
// point is translated by it modulo 1 (Cranley-Patterson rotation). `skip`
// points are dropped from the front of the sequence.
Eigen::MatrixXd sobol_points(int m, int d, int skip = 0,
                             const Eigen::VectorXd* shift = nullptr);

// Sobol points rotated by a uniform shift drawn from `rng`.
Eigen::MatrixXd scrambled_sobol(int m, int d, Rng& rng);

Eigen::VectorXd standard_normal_vector(int n, Rng& rng);
Eigen::MatrixXd standard_normal_matrix(int rows, int cols, Rng& rng);

}  // namespace mfbo

#endif  // MFBO_RANDOM_HPP_
