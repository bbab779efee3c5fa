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

#include <arm_neon.h>

#include <cmath>

#include "mfbo/simd/kernels.hpp"

namespace mfbo::simd::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double scaled_sq_dist(const double* a, const double* b, const double* inv_scale,
                      std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d =
        vmulq_f64(vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)), vld1q_f64(inv_scale + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = (a[i] - b[i]) * inv_scale[i];
    sum += d * d;
  }
  return sum;
}

std::size_t argmin_affine(const double* base, const double* dir, double a,
                          std::size_t n) {
  if (n < 4) return scalar::argmin_affine(base, dir, a, n);

  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t step = vdupq_n_f64(2.0);
  const double start[2] = {0.0, 1.0};
  float64x2_t idx = vld1q_f64(start);
  float64x2_t best_val = vfmaq_f64(vld1q_f64(base), vld1q_f64(dir), va);
  float64x2_t best_idx = idx;

  std::size_t j = 2;
  for (; j + 2 <= n; j += 2) {
    idx = vaddq_f64(idx, step);
    const float64x2_t v = vfmaq_f64(vld1q_f64(base + j), vld1q_f64(dir + j), va);
    const uint64x2_t lt = vcltq_f64(v, best_val);
    best_val = vbslq_f64(lt, v, best_val);
    best_idx = vbslq_f64(lt, idx, best_idx);
  }

  double bv = vgetq_lane_f64(best_val, 0);
  auto bi = static_cast<std::size_t>(vgetq_lane_f64(best_idx, 0));
  const double v1 = vgetq_lane_f64(best_val, 1);
  const auto i1 = static_cast<std::size_t>(vgetq_lane_f64(best_idx, 1));
  if (v1 < bv || (v1 == bv && i1 < bi)) {
    bv = v1;
    bi = i1;
  }
  for (; j < n; ++j) {
    const double v = std::fma(a, dir[j], base[j]);
    if (v < bv) {
      bv = v;
      bi = j;
    }
  }
  return bi;
}

}  // namespace mfbo::simd::neon
