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

#include "sparsecnn/train.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "oracles.hpp"
#include "sparsecnn/autograd.hpp"
#include "sparsecnn/checkpoint.hpp"
#include "sparsecnn/errors.hpp"
#include "sparsecnn/parallel.hpp"

namespace sparsecnn {
namespace {

// Fixed random grids; the view seed perturbs values only when `noisy`.
class ToyDataset : public Dataset {
 public:
  ToyDataset(GridShape shape, int count, int classes, bool noisy) : classes_(classes), noisy_(noisy) {
    Rng rng(41);
    for (int i = 0; i < count; ++i) {
      grids_.push_back(oracle::random_grid<float>(shape, 1, 0.15 + 0.2 * (i % classes), rng));
    }
  }
  std::size_t size() const override { return grids_.size(); }
  int classes() const override { return classes_; }
  int label(std::size_t i) const override { return static_cast<int>(i) % classes_; }
  SparseGrid<float> sample(std::size_t i, std::uint64_t view, const GridShape&) const override {
    if (!noisy_) return grids_[i];
    Rng rng(view);
    std::vector<float> rows = grids_[i].rows();
    for (float& v : rows) v += static_cast<float>(rng.uniform(-0.3, 0.3));
    return SparseGrid<float>(grids_[i].index_ptr(), 1, std::move(rows), grids_[i].ground());
  }

 private:
  std::vector<SparseGrid<float>> grids_;
  int classes_;
  bool noisy_;
};

Network<float> toy_net(std::uint64_t seed = 3) {
  return Network<float>(plan(parse("8C2-MP3/2-8C2-output", LatticeKind::cubic, 1), 0, 3), seed);
}

std::string checkpoint_bytes(const Network<float>& net) {
  std::ostringstream out;
  save_checkpoint(out, net);
  return out.str();
}

TEST(EpochLog, TabSeparatedLine) {
  EpochLog log{3, 0.5, 0.25, 1234.4, 1.5};
  EXPECT_EQ(log.line(), "3\t0.500000\t0.2500\t1234\t1.50");
  EXPECT_EQ(EpochLog::header(), "epoch\ttrain_loss\ttest_error\tmacs_per_sample\tseconds");
}

TEST(Train, ZeroEpochsLeavesWeights) {
  auto net = toy_net();
  const auto before = checkpoint_bytes(net);
  const ToyDataset data(net.input_shape(), 12, 3, false);
  TrainConfig config;
  config.epochs = 0;
  EXPECT_TRUE(train(net, data, &data, config).empty());
  EXPECT_EQ(checkpoint_bytes(net), before);
}

TEST(Train, LearnsSeparableToyData) {
  auto net = toy_net();
  const ToyDataset data(net.input_shape(), 30, 3, false);
  TrainConfig config;
  config.epochs = 15;
  config.batch_size = 5;
  config.lr = 0.02;
  const auto logs = train(net, data, &data, config);
  ASSERT_EQ(logs.size(), 15u);
  EXPECT_LT(logs.back().train_loss, logs.front().train_loss);
  for (const auto& l : logs) EXPECT_GT(l.macs_per_sample, 0);
}

TEST(Train, StopsAtTargetAccuracy) {
  auto net = toy_net();
  const ToyDataset data(net.input_shape(), 30, 3, false);
  TrainConfig config;
  config.epochs = 40;
  config.batch_size = 5;
  config.lr = 0.02;
  config.target_accuracy = 1e-9;  // any accuracy above zero
  const auto logs = train(net, data, &data, config);
  EXPECT_LT(logs.size(), 40u);
  EXPECT_LE(logs.back().test_error, 1.0);
}

TEST(Train, DeterministicAcrossThreadCounts) {
  const ToyDataset data(toy_net().input_shape(), 24, 3, true);
  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 6;
  auto run = [&](int threads) {
    set_thread_count(threads);
    auto net = toy_net();
    std::string lines;
    for (const auto& l : train(net, data, &data, config)) {
      EpochLog copy = l;
      copy.seconds = 0;
      lines += copy.line() + "\n";
    }
    return std::make_pair(lines, checkpoint_bytes(net));
  };
  const int saved = thread_count();
  const auto a = run(1);
  const auto b = run(4);
  set_thread_count(saved);
  EXPECT_EQ(a.first, b.first);
  EXPECT_TRUE(a.second == b.second);
}

TEST(Train, RejectsIncompatibleData) {
  auto net = toy_net();
  const ToyDataset wide(net.input_shape(), 10, 5, false);
  EXPECT_THROW(train(net, wide, nullptr, TrainConfig{}), InvalidArgument);
}

TEST(Evaluate, RepeatsWithoutAugmentationAreBitIdentical) {
  const auto net = toy_net(8);
  const ToyDataset data(net.input_shape(), 17, 3, false);
  EvalConfig one;
  one.repeats = 1;
  EvalConfig twelve = one;
  twelve.repeats = 12;
  const auto a = evaluate(net, data, one);
  const auto b = evaluate(net, data, twelve);
  ASSERT_EQ(a.outputs.size(), b.outputs.size());
  EXPECT_EQ(std::memcmp(a.outputs.data(), b.outputs.data(), a.outputs.size() * sizeof(double)), 0);
  EXPECT_EQ(a.accuracy, b.accuracy);
}

TEST(Evaluate, SingleRepeatEqualsPlainForward) {
  const auto net = toy_net(8);
  const ToyDataset data(net.input_shape(), 6, 3, false);
  const auto report = evaluate(net, data, {});
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto logits = net.forward(data.sample(i, 0, net.input_shape()));
    const auto p = softmax<float>(logits);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(report.outputs[i * 3 + static_cast<std::size_t>(c)], static_cast<double>(p[static_cast<std::size_t>(c)]));
  }
}

TEST(Evaluate, ReportIsSelfConsistent) {
  const auto net = toy_net(8);
  const ToyDataset data(net.input_shape(), 20, 3, true);
  EvalConfig config;
  config.repeats = 4;
  const auto r = evaluate(net, data, config);
  EXPECT_EQ(accuracy_from_outputs(r.outputs, r.labels, r.classes), r.accuracy);
  std::int64_t total = 0;
  for (const auto& row : r.confusion) {
    for (auto v : row) total += v;
  }
  EXPECT_EQ(total, 20);
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    double sum = 0;
    for (int c = 0; c < 3; ++c) sum += r.outputs[i * 3 + static_cast<std::size_t>(c)];
    EXPECT_NEAR(sum, 1.0, 1e-5);
  }
  EXPECT_NE(format_eval_report(r).find("accuracy"), std::string::npos);
}

TEST(Evaluate, FirstMaximumWinsTies) {
  const std::vector<double> outputs{0.5, 0.5, 0.2, 0.8};
  EXPECT_EQ(accuracy_from_outputs(outputs, {0, 1}, 2), 1.0);
  EXPECT_EQ(accuracy_from_outputs(outputs, {1, 1}, 2), 0.5);
}

TEST(Checkpoint, RoundTripIsExact) {
  auto net = toy_net(5);
  const ToyDataset data(net.input_shape(), 9, 3, false);
  TrainConfig config;
  config.epochs = 1;
  config.batch_size = 3;
  train(net, data, nullptr, config);
  const std::string bytes = checkpoint_bytes(net);
  std::istringstream in(bytes);
  const auto back = load_checkpoint(in);
  EXPECT_EQ(checkpoint_bytes(back), bytes);
  const auto x = data.sample(2, 0, net.input_shape());
  EXPECT_EQ(back.forward(x), net.forward(x));
  EXPECT_EQ(render(back.plan().spec), render(net.plan().spec));
}

TEST(Checkpoint, FractionalPoolingNetwork) {
  const Network<float> net(plan(parse("4C2-FMP-4C2-output", LatticeKind::cubic, 1), 5, 2), 1);
  std::istringstream in(checkpoint_bytes(net));
  const auto back = load_checkpoint(in);
  EXPECT_EQ(back.plan().field(), net.plan().field());
  EXPECT_EQ(checkpoint_bytes(back), checkpoint_bytes(net));
}

TEST(Checkpoint, RejectsCorruption) {
  const std::string bytes = checkpoint_bytes(toy_net());
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream in(bad);
    EXPECT_THROW(load_checkpoint(in), DataError);
  }
  {
    std::istringstream in(bytes.substr(0, bytes.size() - 5));
    EXPECT_THROW(load_checkpoint(in), DataError);
  }
  EXPECT_THROW(load_checkpoint(std::string("/nonexistent/model.ckpt")), DataError);
}

TEST(KnotDataset, InterleavedLabelsAndReproducibleSamples) {
  KnotDatasetConfig config;
  config.per_class = 4;
  config.scale = 8;
  config.lattice = LatticeKind::cubic;
  const KnotDataset data(config);
  EXPECT_EQ(data.size(), 12u);
  EXPECT_EQ(data.classes(), 3);
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(data.label(i), static_cast<int>(i % 3));
  const GridShape field{LatticeKind::cubic, 16};
  const auto a = data.sample(5, 1, field);
  const auto b = data.sample(5, 2, field);
  EXPECT_GT(a.active_count(), 0);
  // Without augmentation the view seed is irrelevant.
  EXPECT_TRUE(std::equal(a.index().keys().begin(), a.index().keys().end(), b.index().keys().begin(),
                         b.index().keys().end()));
  EXPECT_THROW(data.sample(0, 0, GridShape{LatticeKind::cubic, 8}), InvalidArgument);
}

TEST(KnotDataset, RotationAugmentationChangesViews) {
  KnotDatasetConfig config;
  config.per_class = 1;
  config.scale = 12;
  config.lattice = LatticeKind::tetrahedral;
  config.augment_rotation = true;
  const KnotDataset data(config);
  const GridShape field{LatticeKind::tetrahedral, 62};
  const auto a = data.sample(1, 1, field);
  const auto b = data.sample(1, 2, field);
  EXPECT_FALSE(std::equal(a.index().keys().begin(), a.index().keys().end(), b.index().keys().begin(),
                          b.index().keys().end()));
}

}  // namespace
}  // namespace sparsecnn
