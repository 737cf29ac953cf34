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

#include "sparsecnn/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "sparsecnn/rng.hpp"

namespace sparsecnn {
namespace {

template <typename T>
std::vector<T> random_vector(std::size_t n, Rng& rng) {
  std::vector<T> v(n);
  for (T& x : v) x = static_cast<T>(rng.uniform(-1, 1));
  return v;
}

template <typename T>
bool bitwise_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

template <typename T>
void check_gemm_against_naive(std::int64_t m, std::int64_t n, std::int64_t k, bool with_bias) {
  Rng rng(static_cast<std::uint64_t>(m * 131 + n * 17 + k));
  const auto a = random_vector<T>(static_cast<std::size_t>(m * k), rng);
  const auto b = random_vector<T>(static_cast<std::size_t>(k * n), rng);
  const auto bias = random_vector<T>(static_cast<std::size_t>(n), rng);
  std::vector<T> c(static_cast<std::size_t>(m * n), T(7));
  kernels::scalar::gemm(m, n, k, a.data(), k, b.data(), n, with_bias ? bias.data() : nullptr, c.data(), n);
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      double want = with_bias ? bias[static_cast<std::size_t>(j)] : 0.0;
      for (std::int64_t p = 0; p < k; ++p) {
        want += static_cast<double>(a[static_cast<std::size_t>(i * k + p)]) * b[static_cast<std::size_t>(p * n + j)];
      }
      ASSERT_NEAR(c[static_cast<std::size_t>(i * n + j)], want, 1e-5 * (1 + std::abs(want)));
    }
  }
}

TEST(ScalarKernels, GemmMatchesNaive) {
  check_gemm_against_naive<float>(7, 5, 3, true);
  check_gemm_against_naive<float>(1, 33, 17, false);
  check_gemm_against_naive<double>(9, 12, 40, true);
  check_gemm_against_naive<double>(4, 1, 1, false);
}

TEST(ScalarKernels, GemmZeroDepthIsBias) {
  const std::vector<float> bias{1, 2, 3};
  std::vector<float> c(6, -1);
  kernels::scalar::gemm(2, 3, 0, nullptr, 0, nullptr, 3, bias.data(), c.data(), 3);
  EXPECT_EQ(c, (std::vector<float>{1, 2, 3, 1, 2, 3}));
}

TEST(ScalarKernels, MaxArgmaxKeepsEarliestTie) {
  std::vector<float> dst{-std::numeric_limits<float>::infinity(), 0.0f};
  std::vector<std::int32_t> arg{-1, -1};
  const std::vector<float> a{1.0f, 0.0f};
  const std::vector<float> b{1.0f, 2.0f};
  kernels::scalar::max_argmax(2, a.data(), 0, dst.data(), arg.data());
  kernels::scalar::max_argmax(2, b.data(), 1, dst.data(), arg.data());
  EXPECT_EQ(dst, (std::vector<float>{1.0f, 2.0f}));
  EXPECT_EQ(arg, (std::vector<std::int32_t>{0, 1}));
}

TEST(ScalarKernels, ReluAndColumnSums) {
  std::vector<double> x{-1, 0, 2, -0.5};
  kernels::scalar::relu(4, x.data());
  EXPECT_EQ(x, (std::vector<double>{0, 0, 2, 0}));
  const std::vector<double> m{1, 2, 3, 4, 5, 6};
  std::vector<double> sums{10, 20};
  kernels::scalar::column_sums(3, 2, m.data(), 2, sums.data());
  EXPECT_EQ(sums, (std::vector<double>{19, 32}));
}

TEST(Dispatch, IsaSelection) {
  const auto isa = kernels::detected_isa();
  EXPECT_NO_THROW(kernels::set_active_isa(kernels::Isa::scalar));
  EXPECT_EQ(kernels::active_isa(), kernels::Isa::scalar);
  EXPECT_NO_THROW(kernels::set_active_isa(isa));
  EXPECT_EQ(kernels::to_string(kernels::Isa::scalar), "scalar");
}

#if defined(SPARSECNN_HAVE_AVX2_KERNELS)

class Avx2Equivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (kernels::detected_isa() != kernels::Isa::avx2) GTEST_SKIP() << "host has no AVX2+FMA";
  }
};

template <typename T>
void compare_gemm(std::int64_t m, std::int64_t n, std::int64_t k, bool with_bias, std::uint64_t seed) {
  Rng rng(seed);
  const std::int64_t lda = k + 3, ldb = n + 1, ldc = n + 2;
  const auto a = random_vector<T>(static_cast<std::size_t>(m * lda), rng);
  const auto b = random_vector<T>(static_cast<std::size_t>(std::max<std::int64_t>(k, 1) * ldb), rng);
  const auto bias = random_vector<T>(static_cast<std::size_t>(n), rng);
  std::vector<T> c1(static_cast<std::size_t>(m * ldc), T(3));
  std::vector<T> c2 = c1;
  const T* bp = with_bias ? bias.data() : nullptr;
  kernels::scalar::gemm(m, n, k, a.data(), lda, b.data(), ldb, bp, c1.data(), ldc);
  kernels::avx2::gemm(m, n, k, a.data(), lda, b.data(), ldb, bp, c2.data(), ldc);
  ASSERT_TRUE(bitwise_equal(c1, c2)) << "m=" << m << " n=" << n << " k=" << k;
}

TEST_F(Avx2Equivalence, GemmBitIdentical) {
  std::uint64_t seed = 1;
  for (std::int64_t m : {1, 3, 8, 17}) {
    for (std::int64_t n : {1, 4, 7, 8, 9, 16, 31, 64, 96}) {
      for (std::int64_t k : {0, 1, 4, 10, 27, 130}) {
        compare_gemm<float>(m, n, k, (seed & 1) != 0, seed);
        compare_gemm<double>(m, n, k, (seed & 2) != 0, seed);
        ++seed;
      }
    }
  }
}

template <typename T>
void compare_elementwise(std::int64_t n, std::uint64_t seed) {
  Rng rng(seed);
  auto x1 = random_vector<T>(static_cast<std::size_t>(n), rng);
  auto x2 = x1;
  kernels::scalar::relu(n, x1.data());
  kernels::avx2::relu(n, x2.data());
  ASSERT_TRUE(bitwise_equal(x1, x2));

  std::vector<T> d1(static_cast<std::size_t>(n), -std::numeric_limits<T>::infinity());
  std::vector<T> d2 = d1;
  std::vector<std::int32_t> a1(static_cast<std::size_t>(n), -1), a2 = a1;
  for (std::int32_t idx = 0; idx < 5; ++idx) {
    auto src = random_vector<T>(static_cast<std::size_t>(n), rng);
    // Plant ties to exercise the earliest-index rule.
    if (idx == 3) src = d1;
    kernels::scalar::max_argmax(n, src.data(), idx, d1.data(), a1.data());
    kernels::avx2::max_argmax(n, src.data(), idx, d2.data(), a2.data());
  }
  ASSERT_TRUE(bitwise_equal(d1, d2));
  ASSERT_EQ(a1, a2);

  const std::int64_t rows = 13, lda = n + 5;
  const auto m = random_vector<T>(static_cast<std::size_t>(rows * lda), rng);
  std::vector<T> s1(static_cast<std::size_t>(n), T(0.5)), s2 = s1;
  kernels::scalar::column_sums(rows, n, m.data(), lda, s1.data());
  kernels::avx2::column_sums(rows, n, m.data(), lda, s2.data());
  ASSERT_TRUE(bitwise_equal(s1, s2));
}

TEST_F(Avx2Equivalence, ElementwiseBitIdentical) {
  for (std::int64_t n : {1, 3, 4, 7, 8, 9, 15, 16, 33, 100}) {
    compare_elementwise<float>(n, static_cast<std::uint64_t>(n));
    compare_elementwise<double>(n, static_cast<std::uint64_t>(n) + 1000);
  }
}

#endif

}  // namespace
}  // namespace sparsecnn
