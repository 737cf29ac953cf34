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

#include "sparsecnn/network.hpp"

#include <cmath>
#include <string>
#include <variant>

#include "sparsecnn/errors.hpp"
#include "sparsecnn/kernels.hpp"
#include "sparsecnn/rng.hpp"

namespace sparsecnn {

namespace {

template <typename T>
void init_weights(ConvLayer<T>& layer, std::uint64_t seed) {
  Rng rng(seed);
  const double stddev = std::sqrt(2.0 / static_cast<double>(layer.rows()));
  for (auto& w : layer.weights.values) w = static_cast<T>(stddev * rng.normal());
}

}  // namespace

std::uint64_t fmp_stage_seed(std::uint64_t seed, std::size_t stage) {
  return derive_seed(seed, {0x464d50ULL, static_cast<std::uint64_t>(stage)});
}

template <typename T>
Network<T>::Network(NetworkPlan plan, std::uint64_t seed) : plan_(std::move(plan)) {
  if (plan_.n_classes < 1) throw InvalidArgument("network needs at least one output class");
  const NetworkSpec& spec = plan_.spec;
  int features = spec.n_input;
  for (std::size_t i = 0; i < spec.hidden_layers(); ++i) {
    Stage<T> stage;
    if (const auto* c = std::get_if<ConvSpec>(&spec.layers[i])) {
      stage.kind = Stage<T>::Kind::conv;
      stage.conv = ConvLayer<T>(FilterGeometry(spec.lattice, c->f, c->s), features, c->n_out);
      init_weights(stage.conv, derive_seed(seed, {i}));
      features = c->n_out;
    } else if (const auto* p = std::get_if<MaxPoolSpec>(&spec.layers[i])) {
      stage.kind = Stage<T>::Kind::max_pool;
      stage.pool = PoolLayer{spec.lattice, p->p, p->s};
    } else if (const auto* f = std::get_if<FmpSpec>(&spec.layers[i])) {
      stage.kind = Stage<T>::Kind::fmp;
      stage.fmp = FMPLayer{spec.lattice, f->ratio, 0};
    }
    stages_.push_back(std::move(stage));
  }
  head_ = ConvLayer<T>(FilterGeometry(spec.lattice, 1, 1), features, plan_.n_classes);
  init_weights(head_, derive_seed(seed, {spec.hidden_layers()}));
}

template <typename T>
std::vector<ConvLayer<T>*> Network<T>::conv_layers() {
  std::vector<ConvLayer<T>*> out;
  for (auto& s : stages_) {
    if (s.kind == Stage<T>::Kind::conv) out.push_back(&s.conv);
  }
  out.push_back(&head_);
  return out;
}

template <typename T>
std::vector<const ConvLayer<T>*> Network<T>::conv_layers() const {
  std::vector<const ConvLayer<T>*> out;
  for (const auto& s : stages_) {
    if (s.kind == Stage<T>::Kind::conv) out.push_back(&s.conv);
  }
  out.push_back(&head_);
  return out;
}

template <typename T>
std::vector<ParamState<T>*> Network<T>::parameters() {
  std::vector<ParamState<T>*> out;
  for (ConvLayer<T>* layer : conv_layers()) {
    out.push_back(&layer->weights);
    out.push_back(&layer->bias);
  }
  return out;
}

template <typename T>
std::int64_t Network<T>::parameter_count() const {
  std::int64_t total = 0;
  for (const ConvLayer<T>* layer : conv_layers()) total += layer->parameter_count();
  return total;
}

template <typename T>
std::vector<std::vector<T>> Network<T>::ground_states() const {
  std::vector<std::vector<T>> grounds;
  grounds.emplace_back(static_cast<std::size_t>(plan_.spec.n_input), T(0));
  for (const auto& stage : stages_) {
    std::vector<T> g = grounds.back();
    if (stage.kind == Stage<T>::Kind::conv) {
      g = conv_ground<T>(g, stage.conv);
      kernels::relu(static_cast<std::int64_t>(g.size()), g.data());
    }
    grounds.push_back(std::move(g));
  }
  return grounds;
}

template <typename T>
std::vector<T> Network<T>::forward(const SparseGrid<T>& input, std::uint64_t fmp_seed, ForwardTrace<T>* trace) const {
  if (input.shape() != input_shape()) {
    throw InvalidArgument("input grid of size " + std::to_string(input.shape().m) + " does not match planned field " +
                          std::to_string(input_shape().m));
  }
  if (input.features() != plan_.spec.n_input) throw InvalidArgument("input feature count does not match network");
  SparseGrid<T> grid = input;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const Stage<T>& stage = stages_[i];
    SparseGrid<T> pre;
    switch (stage.kind) {
      case Stage<T>::Kind::conv: pre = conv_forward(grid, stage.conv); break;
      case Stage<T>::Kind::max_pool: pre = pool_forward(grid, stage.pool); break;
      case Stage<T>::Kind::fmp: pre = fmp_forward(grid, stage.fmp, fmp_stage_seed(fmp_seed, i)); break;
    }
    grid = stage.kind == Stage<T>::Kind::conv ? relu_forward(pre) : pre;
    if (trace) {
      trace->pre.push_back(std::move(pre));
      trace->post.push_back(grid);
    }
  }
  return classifier_forward(grid, head_);
}

template <typename T>
template <typename U>
Network<U> Network<T>::cast() const {
  Network<U> out;
  out.plan_ = plan_;
  auto convert_layer = [](const ConvLayer<T>& src) {
    ConvLayer<U> dst(src.geometry, src.n_in, src.n_out);
    std::copy(src.weights.values.begin(), src.weights.values.end(), dst.weights.values.begin());
    std::copy(src.bias.values.begin(), src.bias.values.end(), dst.bias.values.begin());
    return dst;
  };
  for (const auto& s : stages_) {
    Stage<U> d;
    d.kind = static_cast<typename Stage<U>::Kind>(s.kind);
    if (s.kind == Stage<T>::Kind::conv) d.conv = convert_layer(s.conv);
    d.pool = s.pool;
    d.fmp = s.fmp;
    out.stages_.push_back(std::move(d));
  }
  out.head_ = convert_layer(head_);
  return out;
}

template class Network<float>;
template class Network<double>;
template Network<double> Network<float>::cast<double>() const;
template Network<float> Network<double>::cast<float>() const;
template Network<float> Network<float>::cast<float>() const;
template Network<double> Network<double>::cast<double>() const;

}  // namespace sparsecnn
