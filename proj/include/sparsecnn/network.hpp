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

#include "sparsecnn/netspec.hpp"
#include "sparsecnn/ops.hpp"
#include "sparsecnn/sparse_grid.hpp"

namespace sparsecnn {

// One hidden layer of a network. Convolutions are followed by a rectifier.
template <typename T>
struct Stage {
  enum class Kind { conv, max_pool, fmp };
  Kind kind = Kind::conv;
  ConvLayer<T> conv;
  PoolLayer pool;
  FMPLayer fmp;
};

template <typename T>
struct ForwardTrace {
  std::vector<SparseGrid<T>> pre;   // conv output before the rectifier, or the pooling output
  std::vector<SparseGrid<T>> post;  // stage output
};

// Layers built from a planned architecture, plus a linear classifier head
// (a size-1 filter) applied at the final single site.
template <typename T>
class Network {
 public:
  Network() = default;
  // Weights ~ N(0, 2 / fan_in), biases zero.
  Network(NetworkPlan plan, std::uint64_t seed);

  const NetworkPlan& plan() const { return plan_; }
  GridShape input_shape() const { return plan_.input_shape(); }
  int classes() const { return plan_.n_classes; }

  std::vector<Stage<T>>& stages() { return stages_; }
  const std::vector<Stage<T>>& stages() const { return stages_; }
  ConvLayer<T>& head() { return head_; }
  const ConvLayer<T>& head() const { return head_; }

  // Every learnable layer in forward order, the head last.
  std::vector<ConvLayer<T>*> conv_layers();
  std::vector<const ConvLayer<T>*> conv_layers() const;
  std::vector<ParamState<T>*> parameters();
  std::int64_t parameter_count() const;

  // Ground state at the input (zero) followed by the ground state after each
  // stage, computed by propagating an all-ground field.
  std::vector<std::vector<T>> ground_states() const;

  // Reference forward pass of one sample through the per-grid operations.
  // `fmp_seed` selects the fractional pooling regions (mixed with the stage
  // index).
  std::vector<T> forward(const SparseGrid<T>& input, std::uint64_t fmp_seed = 0,
                         ForwardTrace<T>* trace = nullptr) const;

  template <typename U>
  Network<U> cast() const;

 private:
  NetworkPlan plan_;
  std::vector<Stage<T>> stages_;
  ConvLayer<T> head_;

  template <typename U>
  friend class Network;
};

// Seed used for stage `stage` of a sample whose fractional pooling seed is `seed`.
std::uint64_t fmp_stage_seed(std::uint64_t seed, std::size_t stage);

}  // namespace sparsecnn
