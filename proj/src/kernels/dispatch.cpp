/* Copyright 2026 The SparseCNN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <atomic>
#include <cstdlib>
#include <string>

#include "sparsecnn/errors.hpp"
#include "sparsecnn/kernels.hpp"

namespace sparsecnn::kernels {

namespace {

bool host_has_avx2() {
#if defined(SPARSECNN_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  const Isa best = detected_isa();
  if (const char* env = std::getenv("SPARSECNN_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && best == Isa::avx2) return Isa::avx2;
  }
  return best;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() { return host_has_avx2() ? Isa::avx2 : Isa::scalar; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && !host_has_avx2()) throw InvalidArgument("AVX2 kernels not supported on this host");
  current().store(isa, std::memory_order_relaxed);
}

#if defined(SPARSECNN_HAVE_AVX2_KERNELS)
#define SPARSECNN_DISPATCH(call)                    \
  do {                                              \
    if (active_isa() == Isa::avx2) return avx2::call; \
    return scalar::call;                            \
  } while (0)
#else
#define SPARSECNN_DISPATCH(call) return scalar::call
#endif

void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda, const float* b,
          std::int64_t ldb, const float* bias, float* c, std::int64_t ldc) {
  SPARSECNN_DISPATCH(gemm(m, n, k, a, lda, b, ldb, bias, c, ldc));
}
void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const double* a, std::int64_t lda, const double* b,
          std::int64_t ldb, const double* bias, double* c, std::int64_t ldc) {
  SPARSECNN_DISPATCH(gemm(m, n, k, a, lda, b, ldb, bias, c, ldc));
}
void max_argmax(std::int64_t n, const float* src, std::int32_t index, float* dst, std::int32_t* arg) {
  SPARSECNN_DISPATCH(max_argmax(n, src, index, dst, arg));
}
void max_argmax(std::int64_t n, const double* src, std::int32_t index, double* dst, std::int32_t* arg) {
  SPARSECNN_DISPATCH(max_argmax(n, src, index, dst, arg));
}
void relu(std::int64_t n, float* x) { SPARSECNN_DISPATCH(relu(n, x)); }
void relu(std::int64_t n, double* x) { SPARSECNN_DISPATCH(relu(n, x)); }
void column_sums(std::int64_t rows, std::int64_t n, const float* a, std::int64_t lda, float* sums) {
  SPARSECNN_DISPATCH(column_sums(rows, n, a, lda, sums));
}
void column_sums(std::int64_t rows, std::int64_t n, const double* a, std::int64_t lda, double* sums) {
  SPARSECNN_DISPATCH(column_sums(rows, n, a, lda, sums));
}

}  // namespace sparsecnn::kernels
