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

#include "sparsecnn/autograd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "sparsecnn/errors.hpp"
#include "sparsecnn/parallel.hpp"

namespace sparsecnn {
namespace {

Network<double> make_net(const std::string& arch, LatticeKind lattice, int classes, std::uint64_t seed,
                         int n_input = 1) {
  return Network<double>(plan(parse(arch, lattice, n_input), 0, classes), seed);
}

// True when some active hidden preactivation lies within 1e-3 of the
// rectifier kink, where central differences are not meaningful.
bool near_kink(const Network<double>& net, const SparseGrid<double>& x, std::uint64_t fmp_seed = 0) {
  ForwardTrace<double> trace;
  net.forward(x, fmp_seed, &trace);
  for (std::size_t i = 0; i < net.stages().size(); ++i) {
    if (net.stages()[i].kind != Stage<double>::Kind::conv) continue;
    for (double v : trace.pre[i].rows()) {
      if (std::abs(v) < 1e-3) return true;
    }
  }
  return false;
}

TEST(Softmax, KnownValues) {
  const std::vector<double> logits{0.0, 0.0};
  const auto r = softmax_nll<double>(logits, 0);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(r.d_logits[0], -0.5, 1e-15);
  EXPECT_NEAR(r.d_logits[1], 0.5, 1e-15);
  const std::vector<double> big{1000.0, 0.0, -1000.0};
  const auto p = softmax<double>(big);
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(softmax_nll<double>(big, 2).loss));
  EXPECT_THROW(softmax_nll<double>(logits, 2), InvalidArgument);
}

TEST(BatchLoss, MeanOverSamples) {
  const std::vector<double> logits{0, 0, 1, 0};
  const std::vector<int> labels{0, 1};
  const auto r = batch_loss<double>(logits, labels, 2);
  const double l1 = std::log(2.0);
  const double l2 = std::log(1 + std::exp(1.0));
  EXPECT_NEAR(r.loss, (l1 + l2) / 2, 1e-12);
  EXPECT_NEAR(r.d_logits[0], -0.25, 1e-12);
}

TEST(Sgd, MomentumAndWeightDecay) {
  ParamState<double> p(2);
  p.values = {1.0, -2.0};
  p.grad = {0.5, 0.0};
  ParamState<double>* params[] = {&p};
  sgd_step<double>(params, 0.1, 0.9, 0.01);
  // v = -0.1 * (0.5 + 0.01 * 1) = -0.051; value = 0.949
  EXPECT_NEAR(p.velocity[0], -0.051, 1e-15);
  EXPECT_NEAR(p.values[0], 0.949, 1e-15);
  EXPECT_NEAR(p.values[1], -2.0 + 0.1 * 0.01 * 2.0, 1e-15);
  EXPECT_EQ(p.grad, (std::vector<double>{0.0, 0.0}));
  p.grad = {0.0, 0.0};
  sgd_step<double>(params, 0.1, 0.9, 0.0);
  EXPECT_NEAR(p.velocity[0], 0.9 * -0.051, 1e-15);
}

TEST(Sgd, ZeroGradientIsFixedPoint) {
  ParamState<float> p(3);
  p.values = {1, 2, 3};
  ParamState<float>* params[] = {&p};
  sgd_step<float>(params, 0.5, 0.9, 0.0);
  EXPECT_EQ(p.values, (std::vector<float>{1, 2, 3}));
}

TEST(ConvBackward, MatchesExplicitSums) {
  Rng rng(4);
  for (LatticeKind k : kAllLattices) {
    const auto grid = oracle::random_grid<double>(GridShape{k, 5}, 2, 0.4, rng, {0.3, -0.2});
    ConvLayer<double> layer(FilterGeometry(k, 2, 1), 2, 3);
    oracle::randomize(layer, rng);
    const auto out = conv_active_sites(grid.index(), layer.geometry);
    const auto plan = build_gather(grid, out, layer.geometry);
    std::vector<double> d_out(static_cast<std::size_t>(plan.a_out() * 3));
    for (double& v : d_out) v = rng.uniform(-1, 1);
    const auto g = conv_backward<double>(d_out, plan, layer, grid.active_count());

    std::vector<double> dw(layer.weights.size(), 0.0), db(3, 0.0), dx(grid.rows().size(), 0.0);
    const auto& offs = layer.geometry.offsets();
    for (std::int64_t r = 0; r < plan.a_out(); ++r) {
      const Site u = out->site(r);
      for (int o = 0; o < 3; ++o) {
        const double d = d_out[static_cast<std::size_t>(r * 3 + o)];
        db[static_cast<std::size_t>(o)] += d;
        for (std::size_t kk = 0; kk < offs.size(); ++kk) {
          const Site x = oracle::strided(u, 1, offs[kk]);
          const auto v = grid.value_at(x);
          const std::int32_t row = grid.index().find(x);
          for (int c = 0; c < 2; ++c) {
            const std::size_t wi = (kk * 2 + static_cast<std::size_t>(c)) * 3 + static_cast<std::size_t>(o);
            dw[wi] += v[static_cast<std::size_t>(c)] * d;
            if (row >= 0) dx[static_cast<std::size_t>(row * 2 + c)] += layer.weights.values[wi] * d;
          }
        }
      }
    }
    for (std::size_t i = 0; i < dw.size(); ++i) ASSERT_NEAR(g.d_weights[i], dw[i], 1e-12);
    for (std::size_t i = 0; i < db.size(); ++i) ASSERT_NEAR(g.d_bias[i], db[i], 1e-12);
    for (std::size_t i = 0; i < dx.size(); ++i) ASSERT_NEAR(g.d_input[i], dx[i], 1e-12);
  }
}

TEST(PoolBackward, RoutesToWinner) {
  const GridShape shape{LatticeKind::square, 2};
  auto index = std::make_shared<SiteIndex>(shape, std::vector<std::uint64_t>{pack_site({0, 1, 0}), pack_site({1, 1, 0})});
  const SparseGrid<double> grid(index, 1, {2.0, 5.0}, {0.0});
  const FilterGeometry fp(LatticeKind::square, 2, 2);
  const auto out = conv_active_sites(*index, fp);
  const auto rules = build_rulebook(*index, *out, fp);
  std::vector<double> rows(1);
  std::vector<std::int32_t> arg(1);
  detail::pool_rows<double>(rules, grid.rows(), 1, grid.ground(), rows.data(), arg.data());
  EXPECT_EQ(rows[0], 5.0);
  const std::vector<double> d{1.5};
  const auto d_in = pool_backward<double>(d, rules, arg, 1, 2);
  EXPECT_EQ(d_in, (std::vector<double>{0.0, 1.5}));
}

TEST(ForwardBatch, EqualsPerSampleForward) {
  Rng rng(8);
  for (LatticeKind k : kAllLattices) {
    auto net = make_net("6C2-MP3/2-8C2-output", k, 4, 17 + static_cast<std::uint64_t>(k));
    for (auto* layer : net.conv_layers()) {
      for (double& b : layer->bias.values) b = rng.uniform(-0.2, 0.2);
    }
    std::vector<SparseGrid<double>> samples;
    for (int i = 0; i < 5; ++i) samples.push_back(oracle::random_grid<double>(net.input_shape(), 1, 0.1 * i, rng));
    std::vector<const SparseGrid<double>*> ptrs;
    for (const auto& s : samples) ptrs.push_back(&s);
    const auto batch = forward_batch<double>(net, ptrs);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto single = net.forward(samples[i]);
      for (int c = 0; c < 4; ++c) ASSERT_NEAR(batch.logits[i * 4 + static_cast<std::size_t>(c)], single[static_cast<std::size_t>(c)], 1e-12);
    }
  }
}

TEST(ForwardBatch, MatchesDenseOraclePipeline) {
  Rng rng(21);
  for (LatticeKind k : kAllLattices) {
    auto net = make_net("5C2-MP3/2-4C2-output", k, 3, 3, 2);
    for (auto* layer : net.conv_layers()) oracle::randomize(*layer, rng, 0.3);
    const auto x = oracle::random_grid<double>(net.input_shape(), 2, 0.3, rng);
    auto dense = to_dense(x);
    for (const auto& stage : net.stages()) {
      if (stage.kind == Stage<double>::Kind::conv) {
        dense = oracle::relu(oracle::conv(dense, stage.conv));
      } else {
        dense = oracle::pool(dense, stage.pool);
      }
    }
    ASSERT_EQ(dense.shape.m, 1);
    const auto logits = net.forward(x);
    for (int c = 0; c < 3; ++c) {
      double want = net.head().bias.values[static_cast<std::size_t>(c)];
      for (int j = 0; j < dense.n; ++j) {
        want += dense.values[static_cast<std::size_t>(j)] * net.head().weights.values[static_cast<std::size_t>(j * 3 + c)];
      }
      EXPECT_NEAR(logits[static_cast<std::size_t>(c)], want, 1e-12);
    }
  }
}

TEST(GroundStates, EmptyInputStaysInactive) {
  Rng rng(5);
  for (LatticeKind k : kAllLattices) {
    auto net = make_net("4C2-MP3/2-6C2-output", k, 2, 9);
    for (auto* layer : net.conv_layers()) oracle::randomize(*layer, rng, 0.5);
    const auto grounds = net.ground_states();
    ForwardTrace<double> trace;
    net.forward(SparseGrid<double>::empty(net.input_shape(), {0.0}), 0, &trace);
    for (std::size_t i = 0; i < trace.post.size(); ++i) {
      EXPECT_EQ(trace.post[i].active_count(), 0);
      EXPECT_EQ(trace.post[i].ground(), grounds[i + 1]);
    }
  }
}

TEST(GradCheck, LinearNetworkIsExact) {
  auto net = make_net("MP1-output", LatticeKind::square, 3, 2);
  Rng rng(1);
  const auto x = oracle::random_grid<double>(net.input_shape(), 1, 1.0, rng);
  const auto r = finite_diff_check(net, x, 1, 1e-3);
  EXPECT_EQ(r.parameters_checked, 3 + 3);
  EXPECT_LT(r.max_relative_error, 1e-6);
}

struct GradCase {
  const char* arch;
  LatticeKind lattice;
};

TEST(GradCheck, SmallNetworksOnEveryLattice) {
  const GradCase cases[] = {
      {"4C2-MP2-4C2-output", LatticeKind::square},      {"4C2-MP2-4C2-output", LatticeKind::triangular},
      {"4C2-MP2-4C2-output", LatticeKind::cubic},       {"4C2-MP2-4C2-output", LatticeKind::tetrahedral},
      {"3C2-3C2-MP3/2-3C2-output", LatticeKind::tetrahedral},
  };
  for (const auto& c : cases) {
    Rng rng(1234);
    bool checked = false;
    for (int attempt = 0; attempt < 200 && !checked; ++attempt) {
      auto net = make_net(c.arch, c.lattice, 3, 100 + static_cast<std::uint64_t>(attempt));
      const auto x = oracle::random_grid<double>(net.input_shape(), 1, 0.4, rng);
      if (x.active_count() == 0 || near_kink(net, x)) continue;
      const auto r = finite_diff_check(net, x, attempt % 3, 1e-3);
      EXPECT_EQ(r.parameters_checked, net.parameter_count());
      EXPECT_LT(r.max_relative_error, 1e-4) << c.arch << " on " << to_string(c.lattice);
      checked = true;
    }
    EXPECT_TRUE(checked) << "no kink-free sample for " << c.arch;
  }
}

TEST(GradCheck, FractionalPooling) {
  Rng rng(99);
  bool checked = false;
  for (int attempt = 0; attempt < 200 && !checked; ++attempt) {
    auto net = Network<double>(plan(parse("3C2-FMP-3C2-output", LatticeKind::cubic, 1), 4, 2), 7 + attempt);
    const auto x = oracle::random_grid<double>(net.input_shape(), 1, 0.5, rng);
    if (x.active_count() == 0 || near_kink(net, x, 5)) continue;
    EXPECT_LT(finite_diff_check(net, x, 1, 1e-3, 5).max_relative_error, 1e-4);
    checked = true;
  }
  EXPECT_TRUE(checked);
}

TEST(Training, LossDecreasesOnToyBatch) {
  Rng rng(31);
  auto net = Network<float>(plan(parse("8C2-MP3/2-8C2-output", LatticeKind::triangular, 1), 0, 2), 5);
  std::vector<SparseGrid<float>> samples;
  std::vector<int> labels;
  for (int i = 0; i < 8; ++i) {
    samples.push_back(oracle::random_grid<float>(net.input_shape(), 1, 0.2 + 0.05 * (i % 2), rng));
    labels.push_back(i % 2);
  }
  std::vector<const SparseGrid<float>*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  auto params = net.parameters();
  float first = 0, last = 0;
  for (int step = 0; step < 20; ++step) {
    Tape<float> tape;
    const auto fwd = forward_batch<float>(net, ptrs, {}, &tape);
    const auto loss = batch_loss<float>(fwd.logits, labels, 2);
    if (step == 0) first = loss.loss;
    last = loss.loss;
    backward_batch<float>(net, tape, loss.d_logits);
    sgd_step<float>(params, 0.05, 0.0, 0.0);
  }
  EXPECT_LT(last, first);
}

TEST(Training, BackwardIndependentOfThreadCount) {
  Rng rng(2);
  auto base = Network<float>(plan(parse("8C2-MP3/2-16C2-output", LatticeKind::cubic, 1), 0, 3), 5);
  std::vector<SparseGrid<float>> samples;
  for (int i = 0; i < 6; ++i) samples.push_back(oracle::random_grid<float>(base.input_shape(), 1, 0.3, rng));
  std::vector<const SparseGrid<float>*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2};
  auto run = [&](int threads) {
    set_thread_count(threads);
    Network<float> net = base;
    Tape<float> tape;
    const auto fwd = forward_batch<float>(net, ptrs, {}, &tape);
    const auto loss = batch_loss<float>(fwd.logits, labels, 3);
    backward_batch<float>(net, tape, loss.d_logits);
    std::vector<float> grads;
    for (auto* p : net.parameters()) grads.insert(grads.end(), p->grad.begin(), p->grad.end());
    return grads;
  };
  const int saved = thread_count();
  const auto a = run(1);
  const auto b = run(3);
  set_thread_count(saved);
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace sparsecnn
