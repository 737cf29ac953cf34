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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "sparsecnn/autograd.hpp"
#include "sparsecnn/errors.hpp"
#include "sparsecnn/parallel.hpp"
#include "sparsecnn/rng.hpp"

namespace sparsecnn {

namespace {

constexpr std::uint64_t kFmpStream = 0xf3;
constexpr std::uint64_t kEvalFmpStream = 0xe7;

std::vector<SparseGrid<float>> render_batch(const Dataset& data, std::span<const std::size_t> indices,
                                            std::span<const std::uint64_t> views, const GridShape& field) {
  std::vector<SparseGrid<float>> grids(indices.size());
  parallel_for(
      static_cast<std::int64_t>(indices.size()),
      [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t j = begin; j < end; ++j) grids[j] = data.sample(indices[j], views[j], field);
      },
      1);
  return grids;
}

std::vector<const SparseGrid<float>*> pointers(const std::vector<SparseGrid<float>>& grids) {
  std::vector<const SparseGrid<float>*> out;
  for (const auto& g : grids) out.push_back(&g);
  return out;
}

void check_compatible(const Network<float>& net, const Dataset& data) {
  if (data.classes() > net.classes()) {
    throw InvalidArgument("dataset has " + std::to_string(data.classes()) + " classes, network outputs " +
                          std::to_string(net.classes()));
  }
  if (data.features() != net.plan().spec.n_input) {
    throw InvalidArgument("dataset has " + std::to_string(data.features()) + " input features, network expects " +
                          std::to_string(net.plan().spec.n_input));
  }
}

}  // namespace

std::string EpochLog::header() { return "epoch\ttrain_loss\ttest_error\tmacs_per_sample\tseconds"; }

std::string EpochLog::line() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.4f\t%.0f\t%.2f", epoch, train_loss, test_error, macs_per_sample,
                seconds);
  return buf;
}

std::vector<EpochLog> train(Network<float>& net, const Dataset& train_set, const Dataset* test_set,
                            const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  if (config.batch_size < 1) throw InvalidArgument("batch size must be positive");
  if (config.epochs < 0) throw InvalidArgument("epoch count must be non-negative");
  if (train_set.size() == 0) throw InvalidArgument("empty training set");
  check_compatible(net, train_set);
  if (test_set) check_compatible(net, *test_set);

  const GridShape field = net.input_shape();
  auto params = net.parameters();
  std::vector<std::size_t> order(train_set.size());
  std::vector<EpochLog> logs;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(derive_seed(config.seed, {0x5f, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    const double lr = config.lr * std::pow(config.lr_decay, epoch - 1);

    double loss_sum = 0;
    double macs = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(config.batch_size));
      const std::span<const std::size_t> idx(order.data() + b0, b1 - b0);
      std::vector<std::uint64_t> views, fmp;
      std::vector<int> labels;
      for (std::size_t i : idx) {
        views.push_back(derive_seed(config.seed, {static_cast<std::uint64_t>(epoch), i}));
        fmp.push_back(derive_seed(config.seed, {static_cast<std::uint64_t>(epoch), i, kFmpStream}));
        labels.push_back(train_set.label(i));
      }
      const auto grids = render_batch(train_set, idx, views, field);
      const auto ptrs = pointers(grids);
      BatchForwardOptions<float> options;
      options.fmp_seeds = std::move(fmp);
      Tape<float> tape;
      const auto fwd = forward_batch<float>(net, ptrs, options, &tape);
      const auto loss = batch_loss<float>(fwd.logits, labels, net.classes());
      backward_batch<float>(net, tape, loss.d_logits);
      sgd_step<float>(params, lr, config.momentum, config.weight_decay);
      loss_sum += static_cast<double>(loss.loss) * static_cast<double>(idx.size());
      macs += static_cast<double>(fwd.macs);
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(order.size());
    log.macs_per_sample = macs / static_cast<double>(order.size());
    log.test_error = NAN;
    double accuracy = 0;
    if (test_set) {
      EvalConfig eval;
      eval.repeats = config.test_repeats;
      eval.seed = derive_seed(config.seed, {0xe1});
      eval.batch_size = std::max(config.batch_size, 32);
      accuracy = evaluate(net, *test_set, eval).accuracy;
      log.test_error = 1.0 - accuracy;
    }
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    logs.push_back(log);
    if (on_epoch) on_epoch(log);
    if (test_set && config.target_accuracy > 0 && accuracy >= config.target_accuracy) break;
  }
  return logs;
}

EvalReport evaluate(const Network<float>& net, const Dataset& data, const EvalConfig& config) {
  if (config.repeats < 1) throw InvalidArgument("repeat count must be at least 1");
  if (config.batch_size < 1) throw InvalidArgument("batch size must be positive");
  check_compatible(net, data);
  const int classes = net.classes();
  const GridShape field = net.input_shape();
  const std::size_t n = data.size();

  EvalReport report;
  report.classes = classes;
  report.repeats = config.repeats;
  report.outputs.assign(n * static_cast<std::size_t>(classes), 0.0);
  double macs = 0;
  for (int r = 0; r < config.repeats; ++r) {
    for (std::size_t b0 = 0; b0 < n; b0 += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t b1 = std::min(n, b0 + static_cast<std::size_t>(config.batch_size));
      std::vector<std::size_t> idx(b1 - b0);
      std::iota(idx.begin(), idx.end(), b0);
      std::vector<std::uint64_t> views, fmp;
      for (std::size_t i : idx) {
        views.push_back(derive_seed(config.seed, {static_cast<std::uint64_t>(r), i}));
        // Pooling regions stay fixed across repeats; only augmentation varies.
        fmp.push_back(derive_seed(config.seed, {i, kEvalFmpStream}));
      }
      const auto grids = render_batch(data, idx, views, field);
      BatchForwardOptions<float> options;
      options.fmp_seeds = std::move(fmp);
      const auto fwd = forward_batch<float>(net, pointers(grids), options);
      macs += static_cast<double>(fwd.macs);
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto p = softmax<float>(std::span<const float>(fwd.logits).subspan(j * classes, classes));
        double* out = report.outputs.data() + idx[j] * classes;
        for (int c = 0; c < classes; ++c) out[c] += static_cast<double>(p[c]);
      }
    }
  }
  for (double& v : report.outputs) v /= static_cast<double>(config.repeats);
  report.macs_per_sample = n ? macs / static_cast<double>(n * config.repeats) : 0.0;

  report.confusion.assign(static_cast<std::size_t>(classes), std::vector<std::int64_t>(classes, 0));
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* out = report.outputs.data() + i * classes;
    const int pred = static_cast<int>(std::max_element(out, out + classes) - out);
    const int label = data.label(i);
    report.labels.push_back(label);
    report.predictions.push_back(pred);
    ++report.confusion[label][pred];
    correct += pred == label;
  }
  report.accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
  return report;
}

double accuracy_from_outputs(const std::vector<double>& outputs, const std::vector<int>& labels, int classes) {
  if (outputs.size() != labels.size() * static_cast<std::size_t>(classes)) {
    throw InvalidArgument("output count does not match labels x classes");
  }
  if (labels.empty()) return 0;
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double* out = outputs.data() + i * classes;
    correct += (std::max_element(out, out + classes) - out) == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::string format_eval_report(const EvalReport& report) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "samples\t%zu\nrepeats\t%d\naccuracy\t%.6f\nmacs_per_sample\t%.0f\n",
                report.labels.size(), report.repeats, report.accuracy, report.macs_per_sample);
  out += buf;
  out += "confusion (rows: label, columns: prediction)\n";
  for (const auto& row : report.confusion) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += (c ? "\t" : "") + std::to_string(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string format_eval_json(const EvalReport& report) {
  nlohmann::json j;
  j["samples"] = report.labels.size();
  j["repeats"] = report.repeats;
  j["accuracy"] = report.accuracy;
  j["macs_per_sample"] = report.macs_per_sample;
  j["confusion"] = report.confusion;
  j["labels"] = report.labels;
  j["predictions"] = report.predictions;
  nlohmann::json outputs = nlohmann::json::array();
  for (std::size_t i = 0; i < report.labels.size(); ++i) {
    outputs.push_back(std::vector<double>(report.outputs.begin() + static_cast<std::ptrdiff_t>(i * report.classes),
                                          report.outputs.begin() + static_cast<std::ptrdiff_t>((i + 1) * report.classes)));
  }
  j["outputs"] = outputs;
  return j.dump(2);
}

}  // namespace sparsecnn
