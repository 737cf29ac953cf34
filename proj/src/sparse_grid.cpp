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

#include "sparsecnn/sparse_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binary_io.hpp"
#include "sparsecnn/errors.hpp"

namespace sparsecnn {

namespace {

std::string describe(const Site& s, int d) {
  std::string out = "(" + std::to_string(s[0]) + "," + std::to_string(s[1]);
  if (d == 3) out += "," + std::to_string(s[2]);
  return out + ")";
}

}  // namespace

template <typename T>
DenseGrid<T>::DenseGrid(GridShape shape_, int n_, T fill)
    : shape(shape_), n(n_), values(static_cast<std::size_t>(shape_.site_count() * n_), fill) {}

template <typename T>
std::span<T> DenseGrid<T>::at(const Site& site) {
  return {values.data() + lexicographic_rank(shape, site) * n, static_cast<std::size_t>(n)};
}

template <typename T>
std::span<const T> DenseGrid<T>::at(const Site& site) const {
  return {values.data() + lexicographic_rank(shape, site) * n, static_cast<std::size_t>(n)};
}

template <typename T>
SparseGrid<T>::SparseGrid(SiteIndexPtr index, int n, std::vector<T> rows, std::vector<T> ground)
    : index_(std::move(index)), n_(n), rows_(std::move(rows)), ground_(std::move(ground)) {
  if (!index_) throw InvalidArgument("sparse grid needs a site index");
  if (n_ < 1) throw InvalidArgument("feature count must be positive");
  if (ground_.size() != static_cast<std::size_t>(n_)) throw InvalidArgument("ground vector length != feature count");
  if (rows_.size() != static_cast<std::size_t>(index_->size() * n_)) {
    throw InvalidArgument("row matrix size does not match active count x features");
  }
}

template <typename T>
SparseGrid<T> SparseGrid<T>::empty(GridShape shape, std::vector<T> ground) {
  const int n = static_cast<int>(ground.size());
  return SparseGrid(std::make_shared<SiteIndex>(shape, std::vector<std::uint64_t>{}), n, {}, std::move(ground));
}

template <typename T>
std::span<const T> SparseGrid<T>::value_at(const Site& site) const {
  const std::int32_t r = index_->find(site);
  if (r < 0) return ground_;
  return row(r);
}

template <typename T>
SparseGrid<T> from_dense(const DenseGrid<T>& dense, std::span<const T> ground) {
  if (ground.size() != static_cast<std::size_t>(dense.n)) {
    throw InvalidArgument("ground length " + std::to_string(ground.size()) + " != dense feature count " +
                          std::to_string(dense.n));
  }
  const auto sites = enumerate_sites(dense.shape);
  std::vector<std::uint64_t> keys;
  std::vector<T> rows;
  const std::size_t n = static_cast<std::size_t>(dense.n);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const T* v = dense.values.data() + i * n;
    if (!std::equal(v, v + n, ground.begin())) {
      keys.push_back(pack_site(sites[i]));
      rows.insert(rows.end(), v, v + n);
    }
  }
  auto index = std::make_shared<SiteIndex>(dense.shape, std::move(keys));
  return SparseGrid<T>(std::move(index), dense.n, std::move(rows), {ground.begin(), ground.end()});
}

template <typename T>
DenseGrid<T> to_dense(const SparseGrid<T>& grid) {
  DenseGrid<T> dense(grid.shape(), grid.features());
  const std::size_t n = static_cast<std::size_t>(grid.features());
  const std::int64_t count = grid.shape().site_count();
  for (std::int64_t i = 0; i < count; ++i) {
    std::copy(grid.ground().begin(), grid.ground().end(), dense.values.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  for (std::int64_t r = 0; r < grid.active_count(); ++r) {
    auto dst = dense.at(grid.index().site(r));
    auto src = grid.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return dense;
}

template <typename T>
SparseGrid<T> embed(const SparseGrid<T>& grid, const GridShape& field, const Site& offset) {
  if (field.lattice != grid.shape().lattice) throw InvalidArgument("embed: lattice kinds differ");
  const int d = field.dim();
  std::vector<std::uint64_t> keys;
  keys.reserve(static_cast<std::size_t>(grid.active_count()));
  for (std::int64_t r = 0; r < grid.active_count(); ++r) {
    Site s = grid.index().site(r);
    for (int i = 0; i < d; ++i) s[i] += offset[i];
    if (!field.contains(s)) {
      throw InvalidArgument("embed: translated site " + describe(s, d) + " outside field of size " +
                            std::to_string(field.m));
    }
    keys.push_back(pack_site(s));
  }
  // Translation preserves lexicographic order, so rows keep their positions.
  auto index = std::make_shared<SiteIndex>(field, std::move(keys));
  return SparseGrid<T>(std::move(index), grid.features(), grid.rows(), grid.ground());
}

template <typename T>
Site centering_offset(const SparseGrid<T>& grid, const GridShape& field) {
  Site offset{0, 0, 0};
  if (grid.active_count() == 0) return offset;
  const int d = field.dim();
  Site lo{kMaxLinearSize, kMaxLinearSize, kMaxLinearSize};
  Site hi{-1, -1, -1};
  for (std::int64_t r = 0; r < grid.active_count(); ++r) {
    const Site s = grid.index().site(r);
    for (int i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], s[i]);
      hi[i] = std::max(hi[i], s[i]);
    }
  }
  for (int i = 0; i < d; ++i) {
    if (is_simplex(field.lattice)) {
      const double center = static_cast<double>(field.m - 1) / (d + 1);
      offset[i] = static_cast<std::int32_t>(std::floor(center - 0.5 * (lo[i] + hi[i]) + 0.5));
    } else {
      const std::int32_t extent = hi[i] - lo[i] + 1;
      offset[i] = (field.m - extent) / 2 - lo[i];
    }
  }
  return offset;
}

template <typename To, typename From>
SparseGrid<To> convert(const SparseGrid<From>& grid) {
  std::vector<To> rows(grid.rows().begin(), grid.rows().end());
  std::vector<To> ground(grid.ground().begin(), grid.ground().end());
  return SparseGrid<To>(grid.index_ptr(), grid.features(), std::move(rows), std::move(ground));
}

void write_grid(std::ostream& out, const SparseGrid<float>& grid) {
  using detail::write_le;
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.shape().lattice));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.shape().m));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.features()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(grid.active_count()));
  for (std::uint64_t key : grid.index().keys()) write_le<std::uint64_t>(out, key);
  for (float v : grid.rows()) write_le<float>(out, v);
  for (float v : grid.ground()) write_le<float>(out, v);
}

SparseGrid<float> read_grid(std::istream& in) {
  using detail::read_le;
  const auto kind = read_le<std::uint32_t>(in, "lattice kind");
  if (kind > 3) throw DataError("grid record: unknown lattice kind " + std::to_string(kind));
  const auto m = read_le<std::uint32_t>(in, "grid size");
  const auto n = read_le<std::uint32_t>(in, "feature count");
  const auto a = read_le<std::uint64_t>(in, "active count");
  if (m < 1 || m >= static_cast<std::uint32_t>(kMaxLinearSize) || n < 1) throw DataError("grid record: bad header");
  const GridShape shape{static_cast<LatticeKind>(kind), static_cast<std::int32_t>(m)};
  if (a > static_cast<std::uint64_t>(shape.site_count())) throw DataError("grid record: active count exceeds grid");
  std::vector<std::uint64_t> keys(a);
  for (auto& key : keys) key = read_le<std::uint64_t>(in, "site key");
  std::vector<float> rows(a * n);
  for (auto& v : rows) v = read_le<float>(in, "row value");
  std::vector<float> ground(n);
  for (auto& v : ground) v = read_le<float>(in, "ground value");
  std::shared_ptr<SiteIndex> index;
  try {
    index = std::make_shared<SiteIndex>(shape, std::move(keys));
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("grid record: ") + e.what());
  }
  return SparseGrid<float>(std::move(index), static_cast<int>(n), std::move(rows), std::move(ground));
}

template struct DenseGrid<float>;
template struct DenseGrid<double>;
template class SparseGrid<float>;
template class SparseGrid<double>;
template SparseGrid<float> from_dense(const DenseGrid<float>&, std::span<const float>);
template SparseGrid<double> from_dense(const DenseGrid<double>&, std::span<const double>);
template DenseGrid<float> to_dense(const SparseGrid<float>&);
template DenseGrid<double> to_dense(const SparseGrid<double>&);
template SparseGrid<float> embed(const SparseGrid<float>&, const GridShape&, const Site&);
template SparseGrid<double> embed(const SparseGrid<double>&, const GridShape&, const Site&);
template Site centering_offset(const SparseGrid<float>&, const GridShape&);
template Site centering_offset(const SparseGrid<double>&, const GridShape&);
template SparseGrid<float> convert<float, double>(const SparseGrid<double>&);
template SparseGrid<double> convert<double, float>(const SparseGrid<float>&);
template SparseGrid<float> convert<float, float>(const SparseGrid<float>&);
template SparseGrid<double> convert<double, double>(const SparseGrid<double>&);

}  // namespace sparsecnn
