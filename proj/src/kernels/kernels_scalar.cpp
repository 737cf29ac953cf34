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

#include <cmath>

#include "sparsecnn/kernels.hpp"

namespace sparsecnn::kernels::scalar {

namespace {

template <typename T>
void gemm_impl(std::int64_t m, std::int64_t n, std::int64_t k, const T* a, std::int64_t lda, const T* b,
               std::int64_t ldb, const T* bias, T* c, std::int64_t ldc) {
  for (std::int64_t i = 0; i < m; ++i) {
    T* crow = c + i * ldc;
    for (std::int64_t j = 0; j < n; ++j) crow[j] = bias ? bias[j] : T(0);
    const T* arow = a + i * lda;
    for (std::int64_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * ldb;
      for (std::int64_t j = 0; j < n; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
    }
  }
}

template <typename T>
void max_argmax_impl(std::int64_t n, const T* src, std::int32_t index, T* dst, std::int32_t* arg) {
  for (std::int64_t j = 0; j < n; ++j) {
    if (src[j] > dst[j]) {
      dst[j] = src[j];
      arg[j] = index;
    }
  }
}

template <typename T>
void relu_impl(std::int64_t n, T* x) {
  for (std::int64_t j = 0; j < n; ++j) x[j] = x[j] > T(0) ? x[j] : T(0);
}

template <typename T>
void column_sums_impl(std::int64_t rows, std::int64_t n, const T* a, std::int64_t lda, T* sums) {
  for (std::int64_t i = 0; i < rows; ++i) {
    const T* row = a + i * lda;
    for (std::int64_t j = 0; j < n; ++j) sums[j] += row[j];
  }
}

}  // namespace

void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda, const float* b,
          std::int64_t ldb, const float* bias, float* c, std::int64_t ldc) {
  gemm_impl(m, n, k, a, lda, b, ldb, bias, c, ldc);
}
void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const double* a, std::int64_t lda, const double* b,
          std::int64_t ldb, const double* bias, double* c, std::int64_t ldc) {
  gemm_impl(m, n, k, a, lda, b, ldb, bias, c, ldc);
}
void max_argmax(std::int64_t n, const float* src, std::int32_t index, float* dst, std::int32_t* arg) {
  max_argmax_impl(n, src, index, dst, arg);
}
void max_argmax(std::int64_t n, const double* src, std::int32_t index, double* dst, std::int32_t* arg) {
  max_argmax_impl(n, src, index, dst, arg);
}
void relu(std::int64_t n, float* x) { relu_impl(n, x); }
void relu(std::int64_t n, double* x) { relu_impl(n, x); }
void column_sums(std::int64_t rows, std::int64_t n, const float* a, std::int64_t lda, float* sums) {
  column_sums_impl(rows, n, a, lda, sums);
}
void column_sums(std::int64_t rows, std::int64_t n, const double* a, std::int64_t lda, double* sums) {
  column_sums_impl(rows, n, a, lda, sums);
}

}  // namespace sparsecnn::kernels::scalar
