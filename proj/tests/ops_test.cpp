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

#include "sparsecnn/ops.hpp"

#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "sparsecnn/errors.hpp"
#include "sparsecnn/netspec.hpp"
#include "sparsecnn/parallel.hpp"

namespace sparsecnn {
namespace {

std::set<std::uint64_t> key_set(const SiteIndex& index) { return {index.keys().begin(), index.keys().end()}; }

// Input sizes m <= 8 compatible with filter f and stride s.
std::vector<std::int32_t> valid_sizes(int f, int s) {
  std::vector<std::int32_t> out;
  for (std::int32_t m = f; m <= 8; ++m) {
    if ((m - f) % s == 0) out.push_back(m);
  }
  return out;
}

TEST(ConvForward, MatchesDenseOracle) {
  Rng rng(101);
  for (LatticeKind k : kAllLattices) {
    for (int f : {2, 3}) {
      for (int s : {1, 2}) {
        for (double density : {0.0, 0.05, 0.5, 1.0}) {
          for (int trial = 0; trial < 6; ++trial) {
            const auto sizes = valid_sizes(f, s);
            const std::int32_t m = sizes[rng.below(sizes.size())];
            const int n_in = 1 + static_cast<int>(rng.below(3));
            const int n_out = 1 + static_cast<int>(rng.below(4));
            std::vector<double> ground(static_cast<std::size_t>(n_in));
            for (double& g : ground) g = rng.uniform(-1, 1);
            const auto grid = oracle::random_grid<double>(GridShape{k, m}, n_in, density, rng, ground);
            ConvLayer<double> layer(FilterGeometry(k, f, s), n_in, n_out);
            oracle::randomize(layer, rng);
            const auto sparse = conv_forward(grid, layer);
            const auto want = oracle::conv(to_dense(grid), layer);
            ASSERT_LT(oracle::max_relative_error(to_dense(sparse), want), 1e-12)
                << to_string(k) << " m=" << m << " f=" << f << " s=" << s;
          }
        }
      }
    }
  }
}

TEST(ConvForward, FloatAgreesWithDouble) {
  Rng rng(7);
  const auto grid = oracle::random_grid<double>(GridShape{LatticeKind::cubic, 8}, 4, 0.3, rng);
  ConvLayer<double> layer(FilterGeometry(LatticeKind::cubic, 3, 1), 4, 8);
  oracle::randomize(layer, rng);
  ConvLayer<float> lf(layer.geometry, 4, 8);
  lf.weights.values.assign(layer.weights.values.begin(), layer.weights.values.end());
  lf.bias.values.assign(layer.bias.values.begin(), layer.bias.values.end());
  const auto a = to_dense(conv_forward(grid, layer));
  const auto b = to_dense(conv_forward(convert<float>(grid), lf));
  for (std::size_t i = 0; i < a.values.size(); ++i) ASSERT_NEAR(a.values[i], b.values[i], 1e-5);
}

TEST(ConvForward, RejectsFeatureMismatch) {
  Rng rng(1);
  const auto grid = oracle::random_grid<float>(GridShape{LatticeKind::square, 4}, 2, 0.5, rng);
  ConvLayer<float> layer(FilterGeometry(LatticeKind::square, 2, 1), 3, 1);
  EXPECT_THROW(conv_forward(grid, layer), InvalidArgument);
  ConvLayer<float> wrong_stride(FilterGeometry(LatticeKind::square, 3, 2), 2, 1);
  EXPECT_THROW(conv_forward(grid, wrong_stride), SizeMismatch);
}

TEST(ConvForward, GroundStatePropagates) {
  ConvLayer<float> layer(FilterGeometry(LatticeKind::tetrahedral, 2, 1), 2, 1);
  layer.weights.values = {1, 2, 3, 4, 5, 6, 7, 8};
  layer.bias.values = {0.5f};
  const std::vector<float> g{1.0f, -1.0f};
  // Each of the 4 footprint positions contributes w[2k] - w[2k+1] = -1.
  EXPECT_EQ(conv_ground<float>(g, layer), (std::vector<float>{-3.5f}));
}

TEST(PoolForward, MatchesDenseOracle) {
  Rng rng(202);
  for (LatticeKind k : kAllLattices) {
    for (int p : {2, 3}) {
      for (int s : {1, 2}) {
        for (double density : {0.0, 0.05, 0.5, 1.0}) {
          for (int trial = 0; trial < 5; ++trial) {
            const auto sizes = valid_sizes(p, s);
            const std::int32_t m = sizes[rng.below(sizes.size())];
            const auto grid = oracle::random_grid<double>(GridShape{k, m}, 2, density, rng, {0.1, -0.3});
            const PoolLayer layer{k, p, s};
            const auto sparse = pool_forward(grid, layer);
            ASSERT_EQ(oracle::max_relative_error(to_dense(sparse), oracle::pool(to_dense(grid), layer)), 0.0);
          }
        }
      }
    }
  }
}

TEST(ReluForward, MatchesDenseOracle) {
  Rng rng(3);
  for (LatticeKind k : kAllLattices) {
    const auto grid = oracle::random_grid<double>(GridShape{k, 5}, 3, 0.4, rng, {-0.5, 0.0, 0.25});
    const auto out = relu_forward(grid);
    EXPECT_EQ(to_dense(out).values, oracle::relu(to_dense(grid)).values);
    EXPECT_EQ(out.ground(), (std::vector<double>{0.0, 0.0, 0.25}));
  }
}

TEST(ActiveSites, FigureThreeExample) {
  const GridShape shape{LatticeKind::square, 6};
  const SiteIndex in(shape, {pack_site({1, 1, 0}), pack_site({2, 2, 0}), pack_site({5, 5, 0})});
  const auto out = conv_active_sites(in, FilterGeometry(LatticeKind::square, 2, 1));
  EXPECT_EQ(out->shape().m, 5);
  EXPECT_EQ(out->size(), 8);
  const std::set<std::uint64_t> want{pack_site({0, 0, 0}), pack_site({0, 1, 0}), pack_site({1, 0, 0}),
                                     pack_site({1, 1, 0}), pack_site({1, 2, 0}), pack_site({2, 1, 0}),
                                     pack_site({2, 2, 0}), pack_site({4, 4, 0})};
  EXPECT_EQ(key_set(*out), want);
}

TEST(ActiveSites, MatchesBruteForceOnAllSmallGrids) {
  Rng rng(9);
  for (LatticeKind k : kAllLattices) {
    for (std::int32_t m = 2; m <= 6; ++m) {
      const auto sites = enumerate_sites(GridShape{k, m});
      for (int f : {2, 3}) {
        for (int s : {1, 2}) {
          if (m < f || (m - f) % s != 0) continue;
          for (int trial = 0; trial < 10; ++trial) {
            std::set<std::uint64_t> active;
            for (const Site& x : sites) {
              if (rng.uniform() < 0.15) active.insert(pack_site(x));
            }
            const SiteIndex in(GridShape{k, m}, {active.begin(), active.end()});
            const auto out = conv_active_sites(in, FilterGeometry(k, f, s));
            ASSERT_EQ(key_set(*out), oracle::active_outputs(GridShape{k, m}, active, f, s));
          }
        }
      }
    }
  }
}

TEST(Rulebook, RowBaseOffsetsEntries) {
  const GridShape shape{LatticeKind::square, 3};
  const SiteIndex in(shape, {pack_site({0, 0, 0}), pack_site({2, 2, 0})});
  const FilterGeometry g(LatticeKind::square, 2, 1);
  const auto out = conv_active_sites(in, g);
  const auto a = build_rulebook(in, *out, g);
  const auto b = build_rulebook(in, *out, g, 10);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(b.entries[i], a.entries[i] < 0 ? -1 : a.entries[i] + 10);
  }
}

TEST(Fmp, SizesAndValidity) {
  EXPECT_EQ(fmp_out_size(20, kDefaultFmpRatio), 12);
  EXPECT_EQ(fmp_out_size(2, 1.5), 1);
  EXPECT_THROW(fmp_out_size(1, kDefaultFmpRatio), InvalidArgument);
  EXPECT_THROW(fmp_out_size(10, 2.0), InvalidArgument);
  EXPECT_FALSE(fmp_size_valid(1, kDefaultFmpRatio));
}

TEST(Fmp, RegionsTileTheInput) {
  for (std::int32_t m = 2; m <= 40; ++m) {
    if (!fmp_size_valid(m, kDefaultFmpRatio)) continue;
    const auto r = fmp_regions(m, kDefaultFmpRatio, static_cast<std::uint64_t>(m));
    for (int d = 0; d < 3; ++d) {
      const auto& st = r.starts[d];
      ASSERT_EQ(static_cast<std::int32_t>(st.size()), r.m_out);
      EXPECT_EQ(st.front(), 0);
      EXPECT_EQ(st.back() + 2, m);
      for (std::size_t i = 1; i < st.size(); ++i) {
        const std::int32_t step = st[i] - st[i - 1];
        EXPECT_TRUE(step == 1 || step == 2);
      }
    }
  }
}

TEST(Fmp, SeedReproducesRegions) {
  const auto a = fmp_regions(30, kDefaultFmpRatio, 5);
  const auto b = fmp_regions(30, kDefaultFmpRatio, 5);
  EXPECT_EQ(a.starts, b.starts);
}

TEST(Fmp, MatchesDenseOracle) {
  Rng rng(77);
  for (std::int32_t m = 2; m <= 8; ++m) {
    if (!fmp_size_valid(m, kDefaultFmpRatio)) continue;
    for (double density : {0.0, 0.05, 0.5, 1.0}) {
      const auto grid = oracle::random_grid<double>(GridShape{LatticeKind::cubic, m}, 2, density, rng, {0.2, -0.2});
      const std::uint64_t seed = rng.next_u64();
      const auto sparse = fmp_forward(grid, FMPLayer{LatticeKind::cubic, kDefaultFmpRatio, 0}, seed);
      const auto want = oracle::fmp(to_dense(grid), fmp_regions(m, kDefaultFmpRatio, seed));
      ASSERT_EQ(oracle::max_relative_error(to_dense(sparse), want), 0.0) << "m=" << m;
    }
  }
}

TEST(Fmp, RejectsOtherLattices) {
  Rng rng(1);
  const auto grid = oracle::random_grid<float>(GridShape{LatticeKind::tetrahedral, 5}, 1, 0.5, rng);
  EXPECT_THROW(fmp_forward(grid, FMPLayer{LatticeKind::cubic, kDefaultFmpRatio, 0}, 0), InvalidArgument);
}

TEST(Classifier, ReadsGroundWhenInactive) {
  ConvLayer<float> head(FilterGeometry(LatticeKind::cubic, 1, 1), 2, 2);
  head.weights.values = {1, 0, 0, 1};
  head.bias.values = {0.5f, -0.5f};
  const auto empty = SparseGrid<float>::empty(GridShape{LatticeKind::cubic, 1}, {3.0f, 4.0f});
  EXPECT_EQ(classifier_forward(empty, head), (std::vector<float>{3.5f, 3.5f}));
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  Rng rng(12);
  const auto grid = oracle::random_grid<float>(GridShape{LatticeKind::cubic, 8}, 8, 0.6, rng);
  ConvLayer<float> layer(FilterGeometry(LatticeKind::cubic, 2, 1), 8, 16);
  oracle::randomize(layer, rng);
  const int saved = thread_count();
  set_thread_count(1);
  const auto a = conv_forward(grid, layer);
  set_thread_count(4);
  const auto b = conv_forward(grid, layer);
  set_thread_count(saved);
  EXPECT_EQ(a.rows(), b.rows());
}

}  // namespace
}  // namespace sparsecnn
