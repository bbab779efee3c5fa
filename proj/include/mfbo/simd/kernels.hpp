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

// Data-parallel inner loops used by the GP and the entropy-search estimator.
//
// Every kernel has a portable scalar reference in namespace `scalar` and,
// where the target supports it, an intrinsics variant (`avx2`, `neon`).
// The free functions in `mfbo::simd` dispatch at runtime to the best
// backend the CPU reports. Set MFBO_SIMD=scalar in the environment to pin
// the reference path.
//
// argmin_affine is bit-identical across backends (both sides use fused
// multiply-add and the same lowest-index tie rule). Reductions (dot,
// scaled_sq_dist) differ only by summation order.

#ifndef MFBO_SIMD_KERNELS_HPP_
#define MFBO_SIMD_KERNELS_HPP_

#include <cstddef>
#include <string_view>

namespace mfbo::simd {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view backend_name(Backend b);

// Backend selected for this process.
Backend active_backend();

// Overrides the dispatch choice; returns false if `b` is unavailable here.
bool set_backend(Backend b);

bool backend_available(Backend b);

double dot(const double* a, const double* b, std::size_t n);

// sum_j ((a_j - b_j) * inv_scale_j)^2
double scaled_sq_dist(const double* a, const double* b, const double* inv_scale,
                      std::size_t n);

// Index of the smallest fma(a, dir[j], base[j]); ties go to the lowest index.
// Inputs must be finite.
// n must be >= 1.
std::size_t argmin_affine(const double* base, const double* dir, double a,
                          std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double scaled_sq_dist(const double* a, const double* b, const double* inv_scale,
                      std::size_t n);
std::size_t argmin_affine(const double* base, const double* dir, double a,
                          std::size_t n);
}  // namespace scalar

#if defined(MFBO_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double scaled_sq_dist(const double* a, const double* b, const double* inv_scale,
                      std::size_t n);
std::size_t argmin_affine(const double* base, const double* dir, double a,
                          std::size_t n);
}  // namespace avx2
#endif

#if defined(MFBO_HAVE_NEON)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double scaled_sq_dist(const double* a, const double* b, const double* inv_scale,
                      std::size_t n);
std::size_t argmin_affine(const double* base, const double* dir, double a,
                          std::size_t n);
}  // namespace neon
#endif

}  // namespace mfbo::simd

#endif  // MFBO_SIMD_KERNELS_HPP_
