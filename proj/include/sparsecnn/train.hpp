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
#include <functional>
#include <string>
#include <vector>

#include "sparsecnn/dataset.hpp"
#include "sparsecnn/network.hpp"

namespace sparsecnn {

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double lr_decay = 1.0;  // lr for epoch e (1-based) is lr * lr_decay^(e - 1)
  int epochs = 10;
  int batch_size = 20;
  std::uint64_t seed = 1;
  // Stop once held-out accuracy reaches this value; 0 disables.
  double target_accuracy = 0;
  int test_repeats = 1;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;
  double test_error = 0;  // NaN without a test set
  double macs_per_sample = 0;
  double seconds = 0;

  // Tab-separated; wall time is the last column.
  std::string line() const;
  static std::string header();
};

std::vector<EpochLog> train(Network<float>& net, const Dataset& train_set, const Dataset* test_set,
                            const TrainConfig& config,
                            const std::function<void(const EpochLog&)>& on_epoch = {});

struct EvalConfig {
  int repeats = 1;
  std::uint64_t seed = 0;
  int batch_size = 32;
};

struct EvalReport {
  int classes = 0;
  int repeats = 1;
  double accuracy = 0;
  double macs_per_sample = 0;
  std::vector<int> labels;
  std::vector<int> predictions;
  std::vector<double> outputs;  // samples x classes, softmax averaged over repeats
  std::vector<std::vector<std::int64_t>> confusion;  // [label][prediction]
};

// n-fold testing: each sample is rendered `repeats` times with independent
// augmentation draws and its softmax outputs are averaged.
EvalReport evaluate(const Network<float>& net, const Dataset& data, const EvalConfig& config = {});

// Top-1 accuracy recomputed from averaged outputs (first maximum wins ties).
double accuracy_from_outputs(const std::vector<double>& outputs, const std::vector<int>& labels, int classes);

std::string format_eval_report(const EvalReport& report);
std::string format_eval_json(const EvalReport& report);

}  // namespace sparsecnn
