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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sparsecnn/lattice.hpp"
#include "sparsecnn/site_index.hpp"

namespace sparsecnn {

// 2^(2/3): fractional pooling shrinks each linear dimension by this factor.
inline const double kDefaultFmpRatio = std::cbrt(4.0);

struct ConvSpec {
  int n_out = 0;
  int f = 0;
  int s = 1;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct MaxPoolSpec {
  int p = 0;
  int s = 0;
  friend bool operator==(const MaxPoolSpec&, const MaxPoolSpec&) = default;
};

struct FmpSpec {
  double ratio = kDefaultFmpRatio;
  friend bool operator==(const FmpSpec&, const FmpSpec&) = default;
};

struct OutputSpec {
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

using LayerSpec = std::variant<ConvSpec, MaxPoolSpec, FmpSpec, OutputSpec>;

// Parsed "nCf/s-MPp/s-...-output" architecture. `layers` ends with exactly
// one OutputSpec. `planned_sizes` holds the input field size followed by the
// size after every non-output layer; it ends at 1 once planned.
struct NetworkSpec {
  LatticeKind lattice = LatticeKind::square;
  int n_input = 1;
  std::vector<LayerSpec> layers;
  std::vector<std::int32_t> planned_sizes;

  bool has_fmp() const;
  // Layers excluding the trailing output.
  std::size_t hidden_layers() const { return layers.empty() ? 0 : layers.size() - 1; }
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Grammar: layer ('-' layer)* '-output' with
//   layer := INT 'C' INT ('/' INT)? | 'MP' INT ('/' INT)? | 'FMP'
// Whitespace is ignored. Throws ParseError with the byte offset of the
// offending token.
NetworkSpec parse(std::string_view text, LatticeKind lattice, int n_input);

// Canonical text: strides elided when default.
std::string render(const NetworkSpec& spec);
std::string render(const LayerSpec& layer);

// Backward recurrence m_prev = s * (m - 1) + k from a final size of 1.
// Throws PlanError for networks with fractional pooling (their sizes are
// planned forward from an input scale instead).
std::vector<std::int32_t> required_input_size(const NetworkSpec& spec);

struct LayerPlan {
  std::string label;          // canonical token, e.g. "32C2" or "MP3/2"
  std::int32_t m_in = 0;
  std::int32_t m_out = 0;
  std::int64_t footprint = 0;  // sites covered by the filter or pooling region
  int n_in = 0;
  int n_out = 0;
  std::int64_t parameters = 0;
};

struct NetworkPlan {
  NetworkSpec spec;  // planned_sizes filled in
  int n_classes = 0;
  std::vector<LayerPlan> layers;  // one per hidden layer, then the output layer
  std::int64_t parameters = 0;

  std::int32_t field() const { return spec.planned_sizes.front(); }
  GridShape input_shape() const { return GridShape{spec.lattice, field()}; }
};

// Sizes every layer. Without fractional pooling the field comes from the
// backward recurrence and `scale` is ignored. With fractional pooling the
// field is the smallest size >= scale whose forward pass ends at size 1.
NetworkPlan plan(const NetworkSpec& spec, std::int32_t scale = 0, int n_classes = 0);

struct LayerOps {
  std::string label;
  std::int32_t size = 0;  // output linear size
  std::int64_t footprint = 0;
  std::int64_t active = 0;  // a_out
  std::int64_t macs = 0;
};

struct OpCount {
  std::vector<LayerOps> layers;
  std::int64_t total = 0;
};

// Convolution MACs a_out * F * n_in * n_out per layer; pooling is counted as
// zero. `activity` holds a_out for each hidden layer (the output layer has one
// site). Throws InvalidArgument on a length mismatch.
OpCount count_ops(const NetworkPlan& plan, std::span<const std::int64_t> activity);

// Every site of every layer active.
OpCount count_ops_dense(const NetworkPlan& plan);

// Propagates an input active set through the layers by cover arithmetic.
OpCount count_ops_geometric(const NetworkPlan& plan, const SiteIndex& input_active);

// Lattice-coordinate box (square/cube) of side `side`, centered in `field`
// (on the incenter for triangular/tetrahedral fields).
SiteIndex centered_box(const GridShape& field, std::int32_t side);

std::string format_report(const NetworkPlan& plan, const OpCount& ops);
std::string format_report_json(const NetworkPlan& plan, const OpCount& ops);

}  // namespace sparsecnn
