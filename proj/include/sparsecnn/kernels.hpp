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

#pragma once

#include <cstdint>
#include <string_view>

// Dense inner loops of the engine. Each kernel has a portable scalar
// reference and, on x86-64, an AVX2+FMA variant selected at runtime. Both
// variants perform the same per-element operation sequence (fused
// multiply-adds in ascending reduction order), so their results agree
// bit-for-bit and never depend on how callers partition rows.
namespace sparsecnn::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

// Best variant the host CPU supports.
Isa detected_isa();

// Variant used by the dispatching entry points. Initialized from
// detected_isa(), or from SPARSECNN_ISA=scalar|avx2 when set.
Isa active_isa();

// Throws InvalidArgument when the host cannot run `isa`.
void set_active_isa(Isa isa);

// C[m x n] = A[m x k] * B[k x n] (+ bias broadcast over rows when non-null).
// Row-major with explicit leading dimensions.
void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda, const float* b,
          std::int64_t ldb, const float* bias, float* c, std::int64_t ldc);
void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const double* a, std::int64_t lda, const double* b,
          std::int64_t ldb, const double* bias, double* c, std::int64_t ldc);

// Running max with argmax: where src[j] > dst[j], dst[j] = src[j] and
// arg[j] = index. Strict comparison keeps the earliest index on ties.
void max_argmax(std::int64_t n, const float* src, std::int32_t index, float* dst, std::int32_t* arg);
void max_argmax(std::int64_t n, const double* src, std::int32_t index, double* dst, std::int32_t* arg);

// x[j] = max(x[j], 0)
void relu(std::int64_t n, float* x);
void relu(std::int64_t n, double* x);

// sums[j] += sum over rows i of a[i * lda + j], rows added in ascending order.
void column_sums(std::int64_t rows, std::int64_t n, const float* a, std::int64_t lda, float* sums);
void column_sums(std::int64_t rows, std::int64_t n, const double* a, std::int64_t lda, double* sums);

// Explicit variants, for equivalence testing and benchmarks.
namespace scalar {
void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda, const float* b,
          std::int64_t ldb, const float* bias, float* c, std::int64_t ldc);
void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const double* a, std::int64_t lda, const double* b,
          std::int64_t ldb, const double* bias, double* c, std::int64_t ldc);
void max_argmax(std::int64_t n, const float* src, std::int32_t index, float* dst, std::int32_t* arg);
void max_argmax(std::int64_t n, const double* src, std::int32_t index, double* dst, std::int32_t* arg);
void relu(std::int64_t n, float* x);
void relu(std::int64_t n, double* x);
void column_sums(std::int64_t rows, std::int64_t n, const float* a, std::int64_t lda, float* sums);
void column_sums(std::int64_t rows, std::int64_t n, const double* a, std::int64_t lda, double* sums);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SPARSECNN_HAVE_AVX2_KERNELS 1
namespace avx2 {
void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda, const float* b,
          std::int64_t ldb, const float* bias, float* c, std::int64_t ldc);
void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const double* a, std::int64_t lda, const double* b,
          std::int64_t ldb, const double* bias, double* c, std::int64_t ldc);
void max_argmax(std::int64_t n, const float* src, std::int32_t index, float* dst, std::int32_t* arg);
void max_argmax(std::int64_t n, const double* src, std::int32_t index, double* dst, std::int32_t* arg);
void relu(std::int64_t n, float* x);
void relu(std::int64_t n, double* x);
void column_sums(std::int64_t rows, std::int64_t n, const float* a, std::int64_t lda, float* sums);
void column_sums(std::int64_t rows, std::int64_t n, const double* a, std::int64_t lda, double* sums);
}  // namespace avx2
#endif

}  // namespace sparsecnn::kernels
