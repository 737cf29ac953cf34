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
#include <span>
#include <vector>

#include "sparsecnn/network.hpp"
#include "sparsecnn/ops.hpp"
#include "sparsecnn/sparse_grid.hpp"

namespace sparsecnn {

template <typename T>
struct ConvGrads {
  std::vector<T> d_weights;  // Q^T * d_out
  std::vector<T> d_bias;     // column sums of d_out
  std::vector<T> d_input;    // in_rows x n_in; ground positions dropped
};

// Reverse of M_out = Q * W + B. `d_out` is a_out x n_out. Gradient reaching
// ground-state positions of Q is discarded. `need_input` = false skips d_input.
template <typename T>
ConvGrads<T> conv_backward(std::span<const T> d_out, const GatherPlan<T>& plan, const ConvLayer<T>& layer,
                           std::int64_t in_rows, bool need_input = true);

// Routes each output component's gradient to the input row that won the max.
template <typename T>
std::vector<T> pool_backward(std::span<const T> d_out, const Rulebook& rules, std::span<const std::int32_t> argmax,
                             int n, std::int64_t in_rows);

template <typename T>
struct LossResult {
  T loss = 0;
  std::vector<T> d_logits;
};

// -log softmax(logits)[label] and its gradient softmax - onehot.
template <typename T>
LossResult<T> softmax_nll(std::span<const T> logits, int label);

template <typename T>
std::vector<T> softmax(std::span<const T> logits);

// velocity <- momentum * velocity - lr * (grad + weight_decay * value);
// value <- value + velocity; grad <- 0.
template <typename T>
void sgd_step(std::span<ParamState<T>* const> params, double lr, double momentum, double weight_decay);

// Rows of many samples stacked into one matrix so each layer runs a single
// dense multiply per batch.
template <typename T>
struct BatchGrid {
  std::vector<SiteIndexPtr> sets;
  std::vector<std::int64_t> offsets;  // size batch + 1; rows of sample b start at offsets[b]
  int n = 0;
  std::vector<T> rows;
  std::vector<T> ground;

  std::size_t batch() const { return sets.size(); }
  std::int64_t total_rows() const { return offsets.back(); }
};

template <typename T>
BatchGrid<T> make_batch(std::span<const SparseGrid<T>* const> samples);

template <typename T>
struct TapeEntry {
  GatherPlan<T> gather;  // rules + Q for convolutions; rules only for pooling
  std::vector<T> output;  // stage output rows (post-rectifier for convolutions)
  std::vector<std::int32_t> argmax;
  std::int64_t in_rows = 0;
  int n_in = 0;
};

// Per-stage saved context of one batched forward pass, consumed by backward.
template <typename T>
struct Tape {
  std::vector<TapeEntry<T>> entries;
  std::vector<T> head_input;              // batch x features
  std::vector<std::int32_t> head_rows;    // final-layer row per sample, -1 if ground
  std::int64_t final_rows = 0;
  std::size_t batch = 0;
};

template <typename T>
struct BatchForwardOptions {
  // Per-sample fractional pooling seeds; empty means 0 for every sample.
  std::vector<std::uint64_t> fmp_seeds;
  // Overrides the ground state after every stage (index 0 is the input).
  const std::vector<std::vector<T>>* frozen_grounds = nullptr;
};

template <typename T>
struct BatchForwardResult {
  std::vector<T> logits;  // batch x classes
  std::int64_t macs = 0;  // multiply-accumulates actually performed
};

template <typename T>
BatchForwardResult<T> forward_batch(const Network<T>& net, std::span<const SparseGrid<T>* const> samples,
                                    const BatchForwardOptions<T>& options = {}, Tape<T>* tape = nullptr);

// Accumulates parameter gradients into the network's ParamState buffers.
template <typename T>
void backward_batch(Network<T>& net, Tape<T>& tape, std::span<const T> d_logits);

// Mean loss over the batch; d_logits scaled by 1 / batch.
template <typename T>
LossResult<T> batch_loss(std::span<const T> logits, std::span<const int> labels, int classes);

struct GradCheckResult {
  double max_relative_error = 0;
  std::int64_t parameters_checked = 0;
};

// Central differences against the analytic gradient for every parameter.
// Hidden ground states are held at their unperturbed values, matching the
// backward pass, which does not differentiate through them.
GradCheckResult finite_diff_check(Network<double>& net, const SparseGrid<double>& sample, int label, double eps,
                                  std::uint64_t fmp_seed = 0);

}  // namespace sparsecnn
