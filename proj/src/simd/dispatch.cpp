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

#include <cstdlib>
#include <cstring>

#include "mfbo/simd/kernels.hpp"

namespace mfbo::simd {

namespace {

struct Table {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  double (*scaled_sq_dist)(const double*, const double*, const double*, std::size_t);
  std::size_t (*argmin_affine)(const double*, const double*, double, std::size_t);
};

constexpr Table kScalarTable{Backend::kScalar, &scalar::dot, &scalar::scaled_sq_dist,
                             &scalar::argmin_affine};
#if defined(MFBO_HAVE_AVX2)
constexpr Table kAvx2Table{Backend::kAvx2, &avx2::dot, &avx2::scaled_sq_dist,
                           &avx2::argmin_affine};
#endif
#if defined(MFBO_HAVE_NEON)
constexpr Table kNeonTable{Backend::kNeon, &neon::dot, &neon::scaled_sq_dist,
                           &neon::argmin_affine};
#endif

const Table* table_for(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &kScalarTable;
    case Backend::kAvx2:
#if defined(MFBO_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return &kAvx2Table;
      }
#endif
      return nullptr;
    case Backend::kNeon:
#if defined(MFBO_HAVE_NEON)
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const Table* detect() {
  if (const char* env = std::getenv("MFBO_SIMD"); env && std::strcmp(env, "scalar") == 0) {
    return &kScalarTable;
  }
  for (Backend b : {Backend::kAvx2, Backend::kNeon}) {
    if (const Table* t = table_for(b)) return t;
  }
  return &kScalarTable;
}

const Table*& current() {
  static const Table* t = detect();
  return t;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

Backend active_backend() { return current()->backend; }

bool backend_available(Backend b) { return table_for(b) != nullptr; }

bool set_backend(Backend b) {
  const Table* t = table_for(b);
  if (!t) return false;
  current() = t;
  return true;
}

double dot(const double* a, const double* b, std::size_t n) {
  return current()->dot(a, b, n);
}

double scaled_sq_dist(const double* a, const double* b, const double* inv_scale,
                      std::size_t n) {
  return current()->scaled_sq_dist(a, b, inv_scale, n);
}

std::size_t argmin_affine(const double* base, const double* dir, double a,
                          std::size_t n) {
  return current()->argmin_affine(base, dir, a, n);
}

}  // namespace mfbo::simd
