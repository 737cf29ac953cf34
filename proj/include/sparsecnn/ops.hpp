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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sparsecnn/lattice.hpp"
#include "sparsecnn/site_index.hpp"
#include "sparsecnn/sparse_grid.hpp"

namespace sparsecnn {

// Learnable tensor with its gradient and momentum buffer.
template <typename T>
struct ParamState {
  std::vector<T> values;
  std::vector<T> grad;
  std::vector<T> velocity;

  ParamState() = default;
  explicit ParamState(std::size_t size) : values(size, T(0)), grad(size, T(0)), velocity(size, T(0)) {}
  std::size_t size() const { return values.size(); }
};

// W is (F * n_in) x n_out, row-major; row block k * n_in .. (k + 1) * n_in - 1
// belongs to geometry.offsets()[k].
template <typename T>
struct ConvLayer {
  FilterGeometry geometry;
  int n_in = 0;
  int n_out = 0;
  ParamState<T> weights;
  ParamState<T> bias;

  ConvLayer() = default;
  ConvLayer(FilterGeometry geometry_, int n_in_, int n_out_);

  std::int64_t rows() const { return geometry.volume() * n_in; }
  std::int64_t parameter_count() const { return rows() * n_out + n_out; }
};

struct PoolLayer {
  LatticeKind lattice = LatticeKind::square;
  int p = 1;
  int s = 1;

  FilterGeometry footprint() const { return FilterGeometry(lattice, p, s); }
};

// Fractional max pooling on the cubic lattice.
struct FMPLayer {
  LatticeKind lattice = LatticeKind::cubic;
  double ratio = 0;
  std::uint64_t seed = 0;
};

// For each output row and each footprint position, the input row visible
// there, or -1 where the filter sees the ground state.
struct Rulebook {
  std::int64_t rows = 0;
  std::int64_t footprint = 0;
  std::vector<std::int32_t> entries;

  std::span<const std::int32_t> row(std::int64_t r) const {
    return {entries.data() + r * footprint, static_cast<std::size_t>(footprint)};
  }
};

template <typename T>
struct GatherPlan {
  SiteIndexPtr out;
  Rulebook rules;
  std::int64_t cols = 0;  // F * n_in
  std::vector<T> q;       // a_out x cols, row-major

  std::int64_t a_out() const { return rules.rows; }
};

// Output sites whose receptive field under `geometry` meets an active input.
// Output shape follows out_size; throws SizeMismatch when it is not solvable.
SiteIndexPtr conv_active_sites(const SiteIndex& in, const FilterGeometry& geometry);

// `row_base` is added to every input row number (for batched row matrices).
Rulebook build_rulebook(const SiteIndex& in, const SiteIndex& out, const FilterGeometry& geometry,
                        std::int32_t row_base = 0);

template <typename T>
GatherPlan<T> build_gather(const SparseGrid<T>& grid, SiteIndexPtr out, const FilterGeometry& geometry);

template <typename T>
SparseGrid<T> conv_forward(const SparseGrid<T>& grid, const ConvLayer<T>& layer);

// Ground state of a convolution's output: g_in tiled over all offsets, times W, plus B.
template <typename T>
std::vector<T> conv_ground(std::span<const T> ground_in, const ConvLayer<T>& layer);

template <typename T>
SparseGrid<T> pool_forward(const SparseGrid<T>& grid, const PoolLayer& layer);

// Region starts per dimension; region i spans [starts[i], starts[i] + 2).
struct FmpRegions {
  std::int32_t m_in = 0;
  std::int32_t m_out = 0;
  std::array<std::vector<std::int32_t>, 3> starts;
};

// floor(m_in / ratio); throws unless 1 < ratio < 2 and the size-2 regions
// can tile [0, m_in) with m_out regions.
std::int32_t fmp_out_size(std::int32_t m_in, double ratio);
bool fmp_size_valid(std::int32_t m_in, double ratio);
FmpRegions fmp_regions(std::int32_t m_in, double ratio, std::uint64_t seed);

SiteIndexPtr fmp_active_sites(const SiteIndex& in, const FmpRegions& regions);
Rulebook fmp_rulebook(const SiteIndex& in, const SiteIndex& out, const FmpRegions& regions,
                      std::int32_t row_base = 0);

// `rng_state` selects the region sequences; the same value reproduces them.
template <typename T>
SparseGrid<T> fmp_forward(const SparseGrid<T>& grid, const FMPLayer& layer, std::uint64_t rng_state);

template <typename T>
SparseGrid<T> relu_forward(const SparseGrid<T>& grid);

// Logits from a grid of spatial size 1, using a 1x1 head layer.
template <typename T>
std::vector<T> classifier_forward(const SparseGrid<T>& grid, const ConvLayer<T>& head);

// Building blocks shared with the batched engine.
namespace detail {

// Q[r, k * n .. (k + 1) * n) = input row rules[r, k], or ground when -1.
template <typename T>
void gather_rows(const Rulebook& rules, std::span<const T> in_rows, int n, std::span<const T> ground, T* q);

// out = q * W + B over `rows` rows, row-partitioned across workers.
template <typename T>
void matmul_bias(std::int64_t rows, std::int64_t k, const T* q, const ConvLayer<T>& layer, T* out);

// Max over each rulebook row; `argmax` records the winning footprint
// position per output component (earliest position on ties).
template <typename T>
void pool_rows(const Rulebook& rules, std::span<const T> in_rows, int n, std::span<const T> ground, T* out,
               std::int32_t* argmax);

}  // namespace detail

}  // namespace sparsecnn
