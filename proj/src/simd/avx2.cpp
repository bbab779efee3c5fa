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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "mfbo/simd/kernels.hpp"

namespace mfbo::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double scaled_sq_dist(const double* a, const double* b, const double* inv_scale,
                      std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_mul_pd(
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)),
        _mm256_loadu_pd(inv_scale + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double sum = hsum(acc);
  for (; i < n; ++i) {
    const double d = (a[i] - b[i]) * inv_scale[i];
    sum += d * d;
  }
  return sum;
}

// Two passes: the minimum value with four independent min chains, then the
// first index that attains it. Values are recomputed with the same fma, so
// the equality test is exact.
std::size_t argmin_affine(const double* base, const double* dir, double a,
                          std::size_t n) {
  if (n < 16) return scalar::argmin_affine(base, dir, a, n);

  const __m256d va = _mm256_set1_pd(a);
  __m256d m0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(dir), _mm256_loadu_pd(base));
  __m256d m1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(dir + 4), _mm256_loadu_pd(base + 4));
  __m256d m2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(dir + 8), _mm256_loadu_pd(base + 8));
  __m256d m3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(dir + 12), _mm256_loadu_pd(base + 12));
  std::size_t j = 16;
  for (; j + 16 <= n; j += 16) {
    m0 = _mm256_min_pd(m0, _mm256_fmadd_pd(va, _mm256_loadu_pd(dir + j), _mm256_loadu_pd(base + j)));
    m1 = _mm256_min_pd(m1, _mm256_fmadd_pd(va, _mm256_loadu_pd(dir + j + 4), _mm256_loadu_pd(base + j + 4)));
    m2 = _mm256_min_pd(m2, _mm256_fmadd_pd(va, _mm256_loadu_pd(dir + j + 8), _mm256_loadu_pd(base + j + 8)));
    m3 = _mm256_min_pd(m3, _mm256_fmadd_pd(va, _mm256_loadu_pd(dir + j + 12), _mm256_loadu_pd(base + j + 12)));
  }
  for (; j + 4 <= n; j += 4) {
    m0 = _mm256_min_pd(m0, _mm256_fmadd_pd(va, _mm256_loadu_pd(dir + j), _mm256_loadu_pd(base + j)));
  }
  const __m256d m = _mm256_min_pd(_mm256_min_pd(m0, m1), _mm256_min_pd(m2, m3));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double best = std::fmin(std::fmin(lanes[0], lanes[1]), std::fmin(lanes[2], lanes[3]));
  for (std::size_t t = j; t < n; ++t) best = std::fmin(best, std::fma(a, dir[t], base[t]));
  if (std::isnan(best)) return scalar::argmin_affine(base, dir, a, n);

  const __m256d vb = _mm256_set1_pd(best);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_fmadd_pd(va, _mm256_loadu_pd(dir + i), _mm256_loadu_pd(base + i));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, vb, _CMP_EQ_OQ));
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i)
    if (std::fma(a, dir[i], base[i]) == best) return i;
  return scalar::argmin_affine(base, dir, a, n);
}

}  // namespace mfbo::simd::avx2
