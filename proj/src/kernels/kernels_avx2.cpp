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

// Compiled with -mavx2 -mfma; only reached through dispatch after a CPU check.
#include <immintrin.h>

#include <cmath>

#include "sparsecnn/kernels.hpp"

namespace sparsecnn::kernels::avx2 {

namespace {

// Lane traits so the float and double kernels share one body.
struct F32 {
  using T = float;
  using V = __m256;
  static constexpr int kLanes = 8;
  static V zero() { return _mm256_setzero_ps(); }
  static V load(const T* p) { return _mm256_loadu_ps(p); }
  static void store(T* p, V v) { _mm256_storeu_ps(p, v); }
  static V broadcast(T x) { return _mm256_set1_ps(x); }
  static V fmadd(V a, V b, V c) { return _mm256_fmadd_ps(a, b, c); }
  static V add(V a, V b) { return _mm256_add_ps(a, b); }
  static V max(V a, V b) { return _mm256_max_ps(a, b); }
};

struct F64 {
  using T = double;
  using V = __m256d;
  static constexpr int kLanes = 4;
  static V zero() { return _mm256_setzero_pd(); }
  static V load(const T* p) { return _mm256_loadu_pd(p); }
  static void store(T* p, V v) { _mm256_storeu_pd(p, v); }
  static V broadcast(T x) { return _mm256_set1_pd(x); }
  static V fmadd(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
  static V add(V a, V b) { return _mm256_add_pd(a, b); }
  static V max(V a, V b) { return _mm256_max_pd(a, b); }
};

template <typename L>
inline typename L::V init_acc(const typename L::T* bias, std::int64_t j) {
  return bias ? L::load(bias + j) : L::zero();
}

// Four rows by two vectors of columns; B rows are loaded once per k step and
// shared by all four rows.
template <typename L>
void gemm_block4(std::int64_t k, const typename L::T* a, std::int64_t lda, const typename L::T* b, std::int64_t ldb,
                 const typename L::T* bias, typename L::T* c, std::int64_t ldc, std::int64_t j) {
  using V = typename L::V;
  constexpr int W = L::kLanes;
  V acc[4][2];
  for (int r = 0; r < 4; ++r) {
    acc[r][0] = init_acc<L>(bias, j);
    acc[r][1] = init_acc<L>(bias, j + W);
  }
  for (std::int64_t p = 0; p < k; ++p) {
    const V b0 = L::load(b + p * ldb + j);
    const V b1 = L::load(b + p * ldb + j + W);
    for (int r = 0; r < 4; ++r) {
      const V av = L::broadcast(a[r * lda + p]);
      acc[r][0] = L::fmadd(av, b0, acc[r][0]);
      acc[r][1] = L::fmadd(av, b1, acc[r][1]);
    }
  }
  for (int r = 0; r < 4; ++r) {
    L::store(c + r * ldc + j, acc[r][0]);
    L::store(c + r * ldc + j + W, acc[r][1]);
  }
}

template <typename L>
void gemm_row(std::int64_t n, std::int64_t k, const typename L::T* arow, const typename L::T* b, std::int64_t ldb,
              const typename L::T* bias, typename L::T* crow, std::int64_t j_begin) {
  using T = typename L::T;
  using V = typename L::V;
  constexpr int W = L::kLanes;
  std::int64_t j = j_begin;
  for (; j + W <= n; j += W) {
    V acc = init_acc<L>(bias, j);
    for (std::int64_t p = 0; p < k; ++p) acc = L::fmadd(L::broadcast(arow[p]), L::load(b + p * ldb + j), acc);
    L::store(crow + j, acc);
  }
  for (; j < n; ++j) {
    T acc = bias ? bias[j] : T(0);
    for (std::int64_t p = 0; p < k; ++p) acc = std::fma(arow[p], b[p * ldb + j], acc);
    crow[j] = acc;
  }
}

template <typename L>
void gemm_impl(std::int64_t m, std::int64_t n, std::int64_t k, const typename L::T* a, std::int64_t lda,
               const typename L::T* b, std::int64_t ldb, const typename L::T* bias, typename L::T* c,
               std::int64_t ldc) {
  constexpr int W2 = 2 * L::kLanes;
  const std::int64_t n_blocked = (n / W2) * W2;
  std::int64_t i = 0;
  for (; i + 4 <= m; i += 4) {
    for (std::int64_t j = 0; j < n_blocked; j += W2) {
      gemm_block4<L>(k, a + i * lda, lda, b, ldb, bias, c + i * ldc, ldc, j);
    }
    for (int r = 0; r < 4; ++r) gemm_row<L>(n, k, a + (i + r) * lda, b, ldb, bias, c + (i + r) * ldc, n_blocked);
  }
  for (; i < m; ++i) gemm_row<L>(n, k, a + i * lda, b, ldb, bias, c + i * ldc, 0);
}

template <typename T>
void max_argmax_tail(std::int64_t j, std::int64_t n, const T* src, std::int32_t index, T* dst, std::int32_t* arg) {
  for (; j < n; ++j) {
    if (src[j] > dst[j]) {
      dst[j] = src[j];
      arg[j] = index;
    }
  }
}

template <typename L>
void relu_impl(std::int64_t n, typename L::T* x) {
  constexpr int W = L::kLanes;
  std::int64_t j = 0;
  const auto zero = L::zero();
  // max(x, +0) yields +0 for -0 and for negatives, matching the scalar rule.
  for (; j + W <= n; j += W) L::store(x + j, L::max(L::load(x + j), zero));
  for (; j < n; ++j) x[j] = x[j] > 0 ? x[j] : typename L::T(0);
}

template <typename L>
void column_sums_impl(std::int64_t rows, std::int64_t n, const typename L::T* a, std::int64_t lda,
                      typename L::T* sums) {
  constexpr int W = L::kLanes;
  std::int64_t j = 0;
  for (; j + W <= n; j += W) {
    auto acc = L::load(sums + j);
    for (std::int64_t i = 0; i < rows; ++i) acc = L::add(acc, L::load(a + i * lda + j));
    L::store(sums + j, acc);
  }
  for (; j < n; ++j) {
    auto acc = sums[j];
    for (std::int64_t i = 0; i < rows; ++i) acc += a[i * lda + j];
    sums[j] = acc;
  }
}

}  // namespace

void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda, const float* b,
          std::int64_t ldb, const float* bias, float* c, std::int64_t ldc) {
  gemm_impl<F32>(m, n, k, a, lda, b, ldb, bias, c, ldc);
}

void gemm(std::int64_t m, std::int64_t n, std::int64_t k, const double* a, std::int64_t lda, const double* b,
          std::int64_t ldb, const double* bias, double* c, std::int64_t ldc) {
  gemm_impl<F64>(m, n, k, a, lda, b, ldb, bias, c, ldc);
}

void max_argmax(std::int64_t n, const float* src, std::int32_t index, float* dst, std::int32_t* arg) {
  std::int64_t j = 0;
  const __m256i idx = _mm256_set1_epi32(index);
  for (; j + 8 <= n; j += 8) {
    const __m256 s = _mm256_loadu_ps(src + j);
    const __m256 d = _mm256_loadu_ps(dst + j);
    const __m256 gt = _mm256_cmp_ps(s, d, _CMP_GT_OQ);
    _mm256_storeu_ps(dst + j, _mm256_blendv_ps(d, s, gt));
    const __m256i old = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(arg + j));
    const __m256i merged = _mm256_castps_si256(
        _mm256_blendv_ps(_mm256_castsi256_ps(old), _mm256_castsi256_ps(idx), gt));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(arg + j), merged);
  }
  max_argmax_tail(j, n, src, index, dst, arg);
}

void max_argmax(std::int64_t n, const double* src, std::int32_t index, double* dst, std::int32_t* arg) {
  std::int64_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d s = _mm256_loadu_pd(src + j);
    const __m256d d = _mm256_loadu_pd(dst + j);
    const __m256d gt = _mm256_cmp_pd(s, d, _CMP_GT_OQ);
    _mm256_storeu_pd(dst + j, _mm256_blendv_pd(d, s, gt));
    const int mask = _mm256_movemask_pd(gt);
    for (int l = 0; l < 4; ++l) {
      if (mask & (1 << l)) arg[j + l] = index;
    }
  }
  max_argmax_tail(j, n, src, index, dst, arg);
}

void relu(std::int64_t n, float* x) { relu_impl<F32>(n, x); }
void relu(std::int64_t n, double* x) { relu_impl<F64>(n, x); }

void column_sums(std::int64_t rows, std::int64_t n, const float* a, std::int64_t lda, float* sums) {
  column_sums_impl<F32>(rows, n, a, lda, sums);
}
void column_sums(std::int64_t rows, std::int64_t n, const double* a, std::int64_t lda, double* sums) {
  column_sums_impl<F64>(rows, n, a, lda, sums);
}

}  // namespace sparsecnn::kernels::avx2
