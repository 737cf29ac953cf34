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

#include "sparsecnn/netspec.hpp"

#include <gtest/gtest.h>

#include "architectures.hpp"
#include "json.hpp"
#include "sparsecnn/errors.hpp"

namespace sparsecnn {
namespace {

using testing_archs::published_architectures;

// Independent backward recurrence over a plain list of (window, stride).
std::vector<std::int32_t> recurrence(const std::vector<std::pair<int, int>>& layers) {
  std::vector<std::int32_t> sizes{1};
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    sizes.insert(sizes.begin(), it->second * (sizes.front() - 1) + it->first);
  }
  return sizes;
}

TEST(Parse, NotationExample) {
  const auto spec = parse("32C2-MP3/2-output", LatticeKind::tetrahedral, 1);
  ASSERT_EQ(spec.layers.size(), 3u);
  EXPECT_EQ(std::get<ConvSpec>(spec.layers[0]), (ConvSpec{32, 2, 1}));
  EXPECT_EQ(std::get<MaxPoolSpec>(spec.layers[1]), (MaxPoolSpec{3, 2}));
  EXPECT_TRUE(std::holds_alternative<OutputSpec>(spec.layers[2]));
  const auto p = plan(spec);
  EXPECT_EQ(p.layers[0].footprint, 4);
  EXPECT_EQ(p.layers[1].footprint, 10);
}

TEST(Parse, Defaults) {
  const auto spec = parse("MP3-16C3/2 - output", LatticeKind::square, 1);
  EXPECT_EQ(std::get<MaxPoolSpec>(spec.layers[0]), (MaxPoolSpec{3, 3}));
  EXPECT_EQ(std::get<ConvSpec>(spec.layers[1]), (ConvSpec{16, 3, 2}));
  const auto fmp = parse("FMP-output", LatticeKind::cubic, 1);
  EXPECT_DOUBLE_EQ(std::get<FmpSpec>(fmp.layers[0]).ratio, std::cbrt(4.0));
}

TEST(Parse, HandwritingNetHasNineLayers) {
  const auto spec = parse(testing_archs::kHandwritingNet, LatticeKind::cubic, 1);
  EXPECT_EQ(spec.hidden_layers(), 9u);
  EXPECT_EQ(spec.layers.size(), 10u);
}

struct BadCase {
  const char* text;
  std::size_t position;
};

TEST(Parse, ErrorsCarryByteOffset) {
  const BadCase cases[] = {
      {"32C0-output", 0},        {"32C2-MP0-output", 5}, {"32C2-MP3/2", 10},  {"32C2-XX-output", 5},
      {"32C2--output", 5},       {"output", 0},          {"32C2-output-MP2", 12}, {"32C2x-output", 0},
      {"-32C2-output", 0},
  };
  for (const auto& c : cases) {
    try {
      parse(c.text, LatticeKind::square, 1);
      ADD_FAILURE() << "accepted " << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.position(), c.position) << c.text << ": " << e.what();
    }
  }
}

TEST(Parse, FmpNeedsCubic) { EXPECT_THROW(parse("FMP-output", LatticeKind::tetrahedral, 1), ParseError); }

TEST(Render, ElidesDefaultStrides) {
  const auto spec = parse("32C2/1-MP3/3-MP3/2-64C3/2-output", LatticeKind::square, 1);
  EXPECT_EQ(render(spec), "32C2-MP3-MP3/2-64C3/2-output");
  EXPECT_EQ(render(LayerSpec{ConvSpec{32, 2, 1}}), "32C2");
}

TEST(Render, PublishedArchitecturesRoundTrip) {
  for (const auto& a : published_architectures()) {
    const auto spec = parse(a.text, a.lattice, a.n_input);
    EXPECT_EQ(render(spec), a.text) << a.name;
    EXPECT_EQ(parse(render(spec), a.lattice, a.n_input), spec) << a.name;
    const auto p = plan(spec, a.scale, 10);
    EXPECT_EQ(p.spec.planned_sizes.back(), 1) << a.name;
    EXPECT_EQ(p.spec.planned_sizes.size(), spec.layers.size()) << a.name;
  }
}

TEST(Plan, RequiredInputSizes) {
  EXPECT_EQ(required_input_size(parse("32C2-MP3/2-output", LatticeKind::square, 1)),
            (std::vector<std::int32_t>{4, 3, 1}));
  EXPECT_EQ(required_input_size(parse("32C2-32C2-MP3/2-output", LatticeKind::square, 1)),
            (std::vector<std::int32_t>{5, 4, 3, 1}));
}

TEST(Plan, CifarFieldFromRecurrence) {
  std::vector<std::pair<int, int>> layers;
  for (int block = 0; block < 6; ++block) {
    layers.push_back({2, 1});
    layers.push_back({2, 1});
    if (block < 5) layers.push_back({3, 2});
  }
  const auto want = recurrence(layers);
  const auto got = required_input_size(parse(testing_archs::kPairedCifarNet, LatticeKind::square, 3));
  EXPECT_EQ(got, want);
  EXPECT_EQ(got.front(), 189);
}

TEST(Plan, ForwardSizesReproduceRecurrence) {
  for (const auto& a : published_architectures()) {
    const auto p = plan(parse(a.text, a.lattice, a.n_input), a.scale, 3);
    for (std::size_t i = 0; i + 1 < p.layers.size(); ++i) {
      const auto& l = p.layers[i];
      const auto& layer = p.spec.layers[i];
      if (const auto* c = std::get_if<ConvSpec>(&layer)) {
        EXPECT_EQ(out_size(l.m_in, c->f, c->s), l.m_out);
      } else if (const auto* mp = std::get_if<MaxPoolSpec>(&layer)) {
        EXPECT_EQ(out_size(l.m_in, mp->p, mp->s), l.m_out);
      }
    }
  }
}

TEST(Plan, ShapeNetOnTetrahedralAtScaleTwenty) {
  // Four pooling levels: 1 <- 2 <- 5 <- 6 <- 13 <- 14 <- 29 <- 30 <- 61 <- 62.
  const auto p = plan(parse(testing_archs::kShapeNet4, LatticeKind::tetrahedral, 1), 20, 3);
  EXPECT_EQ(p.spec.planned_sizes, (std::vector<std::int32_t>{62, 61, 30, 29, 14, 13, 6, 5, 2, 1}));
  EXPECT_GE(p.field(), 20);
}

TEST(Plan, FractionalNetworkPlannedFromScale) {
  const auto spec = parse(testing_archs::kShapeNetFmp6, LatticeKind::cubic, 1);
  EXPECT_THROW(required_input_size(spec), PlanError);
  const auto p = plan(spec, 20, 3);
  EXPECT_GE(p.field(), 20);
  EXPECT_EQ(p.spec.planned_sizes.back(), 1);
  // Smallest such field: one less does not work.
  bool smaller_works = true;
  try {
    const auto q = plan(spec, p.field() - 1, 3);
    smaller_works = q.field() == p.field() - 1;
  } catch (const PlanError&) {
    smaller_works = false;
  }
  EXPECT_FALSE(smaller_works);
}

TEST(Plan, PureFractionalPoolingFromTwenty) {
  // 20 -> 12 -> 7 -> 4 -> 2 -> 1
  const auto p = plan(parse("FMP-FMP-FMP-FMP-FMP-output", LatticeKind::cubic, 1), 20, 2);
  EXPECT_EQ(p.spec.planned_sizes, (std::vector<std::int32_t>{20, 12, 7, 4, 2, 1}));
}

TEST(Plan, ParameterCounts) {
  const auto p = plan(parse("32C2-output", LatticeKind::tetrahedral, 3), 0, 5);
  EXPECT_EQ(p.layers[0].parameters, 4 * 3 * 32 + 32);
  EXPECT_EQ(p.layers[1].parameters, 32 * 5 + 5);
  EXPECT_EQ(p.parameters, 4 * 3 * 32 + 32 + 32 * 5 + 5);
}

TEST(CountOps, SmallestTwoLayerNetwork) {
  // Field 3, first conv 3 -> 2: a_out = 4 sites, 4-site filter, one feature.
  const auto p = plan(parse("1C2-1C2-output", LatticeKind::square, 1), 0, 1);
  ASSERT_EQ(p.field(), 3);
  const auto ops = count_ops_dense(p);
  EXPECT_EQ(ops.layers[0].active, 4);
  EXPECT_EQ(ops.layers[0].macs, 16);
}

TEST(CountOps, ThreeDimensionalFirstLayerRatio) {
  // 96 filters of size 7, stride 2, over 3 input features; 112 outputs per axis.
  const auto p3 = plan(parse("96C7/2-output", LatticeKind::cubic, 3), 0, 0);
  const auto p2 = plan(parse("96C7/2-output", LatticeKind::square, 3), 0, 0);
  const std::int64_t a3 = 112LL * 112 * 112, a2 = 112LL * 112;
  const auto o3 = count_ops(p3, std::vector<std::int64_t>{a3});
  const auto o2 = count_ops(p2, std::vector<std::int64_t>{a2});
  EXPECT_EQ(o3.layers[0].macs, a3 * 343 * 3 * 96);
  EXPECT_EQ(o3.layers[0].macs % o2.layers[0].macs, 0);
  EXPECT_EQ(o3.layers[0].macs / o2.layers[0].macs, 784);
}

TEST(CountOps, LinearInActivity) {
  const auto p = plan(parse(testing_archs::kKnotNet, LatticeKind::tetrahedral, 1), 0, 3);
  std::vector<std::int64_t> a{100, 40, 30, 12, 5};
  const auto base = count_ops(p, a);
  for (auto& x : a) x *= 2;
  const auto twice = count_ops(p, a);
  // The head always sees one site, so only hidden layers double.
  EXPECT_EQ(twice.total - twice.layers.back().macs, 2 * (base.total - base.layers.back().macs));
  EXPECT_THROW(count_ops(p, std::vector<std::int64_t>{1, 2}), InvalidArgument);
}

TEST(CountOps, DenseCountsEverySite) {
  const auto p = plan(parse("8C2-MP3/2-output", LatticeKind::triangular, 1), 0, 2);
  const auto ops = count_ops_dense(p);
  EXPECT_EQ(ops.layers[0].active, site_count(LatticeKind::triangular, 3));
  EXPECT_EQ(ops.layers[0].macs, 6 * 3 * 1 * 8);
  EXPECT_EQ(ops.layers[1].macs, 0);
}

TEST(CountOps, TriangularCifarNetIsCheaper) {
  const auto sq = plan(parse(testing_archs::kPairedCifarNet, LatticeKind::square, 3), 0, 10);
  const auto tri = plan(parse(testing_archs::kPairedCifarNet, LatticeKind::triangular, 3), 0, 10);
  const auto sq_ops = count_ops_geometric(sq, centered_box(sq.input_shape(), 32));
  const auto tri_ops = count_ops_geometric(tri, centered_box(tri.input_shape(), 32));
  // A 32x32 image: 33x33 outputs on the square lattice, one fewer on the triangular.
  EXPECT_EQ(sq_ops.layers[0].active, 33 * 33);
  EXPECT_EQ(tri_ops.layers[0].active, 33 * 33 - 1);
  EXPECT_EQ(sq_ops.layers[0].macs, 33 * 33 * 4 * 3 * 32);
  EXPECT_EQ(tri_ops.layers[0].macs, (33 * 33 - 1) * 3 * 3 * 32);
  for (std::size_t i = 0; i < sq_ops.layers.size(); ++i) EXPECT_LE(tri_ops.layers[i].macs, sq_ops.layers[i].macs);
  EXPECT_LT(tri_ops.total, sq_ops.total * 3 / 4);
  // About 41 MegaOps on the square lattice.
  EXPECT_NEAR(static_cast<double>(sq_ops.total) / 1e6, 41.5, 0.1);
}

TEST(CountOps, GeometricDenseBoxEqualsDense) {
  const auto p = plan(parse("4C2-MP3/2-4C2-output", LatticeKind::square, 1), 0, 2);
  const auto dense = count_ops_dense(p);
  const auto geo = count_ops_geometric(p, centered_box(p.input_shape(), p.field()));
  EXPECT_EQ(dense.total, geo.total);
}

TEST(Report, JsonHasLayers) {
  const auto p = plan(parse(testing_archs::kKnotNet, LatticeKind::tetrahedral, 1), 0, 3);
  const auto j = nlohmann::json::parse(format_report_json(p, count_ops_dense(p)));
  EXPECT_EQ(j["field"], 14);
  EXPECT_EQ(j["layers"].size(), 6u);
  EXPECT_EQ(j["architecture"], testing_archs::kKnotNet);
  EXPECT_NE(format_report(p, count_ops_dense(p)).find("MegaOps"), std::string::npos);
}

}  // namespace
}  // namespace sparsecnn
