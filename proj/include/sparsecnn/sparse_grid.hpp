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
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "sparsecnn/lattice.hpp"
#include "sparsecnn/site_index.hpp"

namespace sparsecnn {

// Every valid site of a shape with an n-vector each, stored in lexicographic
// site order. Used as the oracle representation and for image input.
template <typename T>
struct DenseGrid {
  GridShape shape;
  int n = 1;
  std::vector<T> values;

  DenseGrid() = default;
  DenseGrid(GridShape shape_, int n_, T fill = T(0));

  std::span<T> at(const Site& site);
  std::span<const T> at(const Site& site) const;
};

// One layer's sparse state. Active sites carry explicit rows; every other
// site implicitly carries the ground-state vector.
template <typename T>
class SparseGrid {
 public:
  SparseGrid() = default;
  SparseGrid(SiteIndexPtr index, int n, std::vector<T> rows, std::vector<T> ground);

  // Grid with no active sites.
  static SparseGrid empty(GridShape shape, std::vector<T> ground);

  const GridShape& shape() const { return index_->shape(); }
  const SiteIndex& index() const { return *index_; }
  const SiteIndexPtr& index_ptr() const { return index_; }
  int features() const { return n_; }
  std::int64_t active_count() const { return index_->size(); }
  const std::vector<T>& rows() const { return rows_; }
  const std::vector<T>& ground() const { return ground_; }

  std::span<const T> row(std::int64_t r) const {
    return {rows_.data() + r * n_, static_cast<std::size_t>(n_)};
  }
  // Row for active sites, ground otherwise.
  std::span<const T> value_at(const Site& site) const;

 private:
  SiteIndexPtr index_ = std::make_shared<SiteIndex>();
  int n_ = 0;
  std::vector<T> rows_;
  std::vector<T> ground_;
};

// Sites whose vector differs from `ground` in any component become active.
template <typename T>
SparseGrid<T> from_dense(const DenseGrid<T>& dense, std::span<const T> ground);

template <typename T>
DenseGrid<T> to_dense(const SparseGrid<T>& grid);

// Translates every active site by `offset` into `field`.
template <typename T>
SparseGrid<T> embed(const SparseGrid<T>& grid, const GridShape& field, const Site& offset);

// Offset that centers the bounding box of `grid`'s active sites in `field`.
// For simplex lattices the box is centered on the field's incenter.
template <typename T>
Site centering_offset(const SparseGrid<T>& grid, const GridShape& field);

template <typename T>
SparseGrid<T> embed_centered(const SparseGrid<T>& grid, const GridShape& field) {
  return embed(grid, field, centering_offset(grid, field));
}

template <typename To, typename From>
SparseGrid<To> convert(const SparseGrid<From>& grid);

// Binary record, little-endian: u32 lattice, u32 m, u32 n, u64 a, a u64
// site keys, a*n f32 values, n f32 ground values.
void write_grid(std::ostream& out, const SparseGrid<float>& grid);
SparseGrid<float> read_grid(std::istream& in);

}  // namespace sparsecnn
