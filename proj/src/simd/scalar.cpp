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

#include <cmath>

#include "mfbo/simd/kernels.hpp"

namespace mfbo::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double scaled_sq_dist(const double* a, const double* b, const double* inv_scale,
                      std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) * inv_scale[i];
    sum += d * d;
  }
  return sum;
}

std::size_t argmin_affine(const double* base, const double* dir, double a,
                          std::size_t n) {
  std::size_t best = 0;
  double best_val = std::fma(a, dir[0], base[0]);
  for (std::size_t j = 1; j < n; ++j) {
    const double v = std::fma(a, dir[j], base[j]);
    if (v < best_val) {
      best_val = v;
      best = j;
    }
  }
  return best;
}

}  // namespace mfbo::simd::scalar
