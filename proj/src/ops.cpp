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

#include "sparsecnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsecnn/errors.hpp"
#include "sparsecnn/kernels.hpp"
#include "sparsecnn/parallel.hpp"
#include "sparsecnn/rng.hpp"

namespace sparsecnn {

template <typename T>
ConvLayer<T>::ConvLayer(FilterGeometry geometry_, int n_in_, int n_out_)
    : geometry(std::move(geometry_)), n_in(n_in_), n_out(n_out_) {
  if (n_in < 1 || n_out < 1) throw InvalidArgument("convolution feature counts must be positive");
  weights = ParamState<T>(static_cast<std::size_t>(rows() * n_out));
  bias = ParamState<T>(static_cast<std::size_t>(n_out));
}

SiteIndexPtr conv_active_sites(const SiteIndex& in, const FilterGeometry& geometry) {
  const GridShape& shape = in.shape();
  if (shape.lattice != geometry.lattice()) throw InvalidArgument("filter lattice does not match grid lattice");
  const std::int32_t s = geometry.stride();
  const GridShape out_shape{shape.lattice, out_size(shape.m, geometry.size(), s)};
  const int d = shape.dim();
  std::vector<std::uint64_t> keys;
  keys.reserve(static_cast<std::size_t>(in.size() * geometry.volume()));
  for (std::uint64_t key : in.keys()) {
    const Site x = unpack_site(key);
    for (const Site& o : geometry.offsets()) {
      Site u{0, 0, 0};
      bool ok = true;
      for (int i = 0; i < d && ok; ++i) {
        const std::int32_t v = x[i] - o[i];
        ok = v >= 0 && v % s == 0;
        u[i] = v / s;
      }
      if (ok && out_shape.contains(u)) keys.push_back(pack_site(u));
    }
  }
  return std::make_shared<SiteIndex>(SiteIndex::from_unsorted(out_shape, std::move(keys)));
}

Rulebook build_rulebook(const SiteIndex& in, const SiteIndex& out, const FilterGeometry& geometry,
                        std::int32_t row_base) {
  Rulebook rules;
  rules.rows = out.size();
  rules.footprint = geometry.volume();
  rules.entries.resize(static_cast<std::size_t>(rules.rows * rules.footprint));
  const std::int32_t s = geometry.stride();
  const auto& offsets = geometry.offsets();
  parallel_for(
      rules.rows,
      [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t r = begin; r < end; ++r) {
          const Site u = out.site(r);
          std::int32_t* dst = rules.entries.data() + r * rules.footprint;
          for (std::size_t k = 0; k < offsets.size(); ++k) {
            const Site x{s * u[0] + offsets[k][0], s * u[1] + offsets[k][1], s * u[2] + offsets[k][2]};
            const std::int32_t idx = in.find(x);
            dst[k] = idx < 0 ? -1 : idx + row_base;
          }
        }
      },
      256);
  return rules;
}

namespace detail {

template <typename T>
void gather_rows(const Rulebook& rules, std::span<const T> in_rows, int n, std::span<const T> ground, T* q) {
  const std::int64_t cols = rules.footprint * n;
  parallel_for(
      rules.rows,
      [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t r = begin; r < end; ++r) {
          T* dst = q + r * cols;
          const std::int32_t* src = rules.entries.data() + r * rules.footprint;
          for (std::int64_t k = 0; k < rules.footprint; ++k) {
            const T* v = src[k] < 0 ? ground.data() : in_rows.data() + static_cast<std::int64_t>(src[k]) * n;
            std::copy(v, v + n, dst + k * n);
          }
        }
      },
      256);
}

template <typename T>
void matmul_bias(std::int64_t rows, std::int64_t k, const T* q, const ConvLayer<T>& layer, T* out) {
  if (k != layer.rows()) throw InternalError("gather width does not match weight rows");
  const std::int64_t n = layer.n_out;
  parallel_for(
      rows,
      [&](std::int64_t begin, std::int64_t end) {
        kernels::gemm(end - begin, n, k, q + begin * k, k, layer.weights.values.data(), n,
                      layer.bias.values.data(), out + begin * n, n);
      },
      64);
}

template <typename T>
void pool_rows(const Rulebook& rules, std::span<const T> in_rows, int n, std::span<const T> ground, T* out,
               std::int32_t* argmax) {
  parallel_for(
      rules.rows,
      [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t r = begin; r < end; ++r) {
          const std::int32_t* src = rules.entries.data() + r * rules.footprint;
          T* dst = out + r * n;
          std::int32_t* arg = argmax + r * n;
          auto value = [&](std::int64_t k) {
            return src[k] < 0 ? ground.data() : in_rows.data() + static_cast<std::int64_t>(src[k]) * n;
          };
          const T* first = value(0);
          std::copy(first, first + n, dst);
          std::fill(arg, arg + n, 0);
          for (std::int64_t k = 1; k < rules.footprint; ++k) {
            kernels::max_argmax(n, value(k), static_cast<std::int32_t>(k), dst, arg);
          }
        }
      },
      256);
}

}  // namespace detail

template <typename T>
GatherPlan<T> build_gather(const SparseGrid<T>& grid, SiteIndexPtr out, const FilterGeometry& geometry) {
  GatherPlan<T> plan;
  plan.rules = build_rulebook(grid.index(), *out, geometry);
  plan.out = std::move(out);
  plan.cols = geometry.volume() * grid.features();
  plan.q.resize(static_cast<std::size_t>(plan.rules.rows * plan.cols));
  detail::gather_rows<T>(plan.rules, grid.rows(), grid.features(), grid.ground(), plan.q.data());
  return plan;
}

template <typename T>
std::vector<T> conv_ground(std::span<const T> ground_in, const ConvLayer<T>& layer) {
  if (ground_in.size() != static_cast<std::size_t>(layer.n_in)) throw InvalidArgument("ground length != n_in");
  std::vector<T> tiled;
  tiled.reserve(static_cast<std::size_t>(layer.rows()));
  for (std::int64_t k = 0; k < layer.geometry.volume(); ++k) tiled.insert(tiled.end(), ground_in.begin(), ground_in.end());
  std::vector<T> out(static_cast<std::size_t>(layer.n_out));
  kernels::gemm(1, layer.n_out, layer.rows(), tiled.data(), layer.rows(), layer.weights.values.data(), layer.n_out,
                layer.bias.values.data(), out.data(), layer.n_out);
  return out;
}

template <typename T>
SparseGrid<T> conv_forward(const SparseGrid<T>& grid, const ConvLayer<T>& layer) {
  if (grid.features() != layer.n_in) {
    throw InvalidArgument("convolution expects " + std::to_string(layer.n_in) + " input features, grid has " +
                          std::to_string(grid.features()));
  }
  auto out = conv_active_sites(grid.index(), layer.geometry);
  GatherPlan<T> plan = build_gather(grid, out, layer.geometry);
  std::vector<T> rows(static_cast<std::size_t>(plan.a_out() * layer.n_out));
  detail::matmul_bias(plan.a_out(), plan.cols, plan.q.data(), layer, rows.data());
  return SparseGrid<T>(std::move(out), layer.n_out, std::move(rows), conv_ground<T>(grid.ground(), layer));
}

template <typename T>
SparseGrid<T> pool_forward(const SparseGrid<T>& grid, const PoolLayer& layer) {
  const FilterGeometry footprint = layer.footprint();
  auto out = conv_active_sites(grid.index(), footprint);
  const Rulebook rules = build_rulebook(grid.index(), *out, footprint);
  const int n = grid.features();
  std::vector<T> rows(static_cast<std::size_t>(rules.rows * n));
  std::vector<std::int32_t> argmax(rows.size());
  detail::pool_rows<T>(rules, grid.rows(), n, grid.ground(), rows.data(), argmax.data());
  return SparseGrid<T>(std::move(out), n, std::move(rows), grid.ground());
}

std::int32_t fmp_out_size(std::int32_t m_in, double ratio) {
  if (!(ratio > 1.0 && ratio < 2.0)) throw InvalidArgument("fractional pooling ratio must lie in (1, 2)");
  const auto m_out = static_cast<std::int32_t>(std::floor(m_in / ratio));
  if (m_out < 1) throw InvalidArgument("fractional pooling of size " + std::to_string(m_in) + " leaves no output");
  if (m_in > 2 * m_out || m_in < m_out + 1) {
    throw InvalidArgument("fractional pooling cannot tile size " + std::to_string(m_in) + " with " +
                          std::to_string(m_out) + " size-2 regions");
  }
  return m_out;
}

bool fmp_size_valid(std::int32_t m_in, double ratio) {
  try {
    fmp_out_size(m_in, ratio);
    return true;
  } catch (const InvalidArgument&) {
    return false;
  }
}

FmpRegions fmp_regions(std::int32_t m_in, double ratio, std::uint64_t seed) {
  FmpRegions regions;
  regions.m_in = m_in;
  regions.m_out = fmp_out_size(m_in, ratio);
  const std::int32_t m_out = regions.m_out;
  // m_out increments from {1, 2} summing to m_in; the last one is a 2 so the
  // final region ends exactly at m_in.
  const std::int32_t twos = m_in - m_out - 1;
  for (int d = 0; d < 3; ++d) {
    std::vector<std::int32_t> inc(static_cast<std::size_t>(m_out - 1), 1);
    std::fill(inc.begin(), inc.begin() + twos, 2);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(d)}));
    for (std::size_t i = inc.size(); i > 1; --i) std::swap(inc[i - 1], inc[rng.below(i)]);
    auto& starts = regions.starts[d];
    starts.resize(static_cast<std::size_t>(m_out));
    std::int32_t pos = 0;
    for (std::int32_t i = 0; i < m_out; ++i) {
      starts[i] = pos;
      if (i + 1 < m_out) pos += inc[i];
    }
  }
  return regions;
}

namespace {

// cover[c] lists region indices whose interval contains coordinate c.
std::vector<std::array<std::int32_t, 2>> region_cover(const std::vector<std::int32_t>& starts, std::int32_t m_in) {
  std::vector<std::array<std::int32_t, 2>> cover(static_cast<std::size_t>(m_in), {-1, -1});
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(starts.size()); ++i) {
    for (std::int32_t c = starts[i]; c < starts[i] + 2 && c < m_in; ++c) {
      auto& slot = cover[c];
      (slot[0] < 0 ? slot[0] : slot[1]) = i;
    }
  }
  return cover;
}

}  // namespace

SiteIndexPtr fmp_active_sites(const SiteIndex& in, const FmpRegions& regions) {
  if (in.shape().lattice != LatticeKind::cubic) throw InvalidArgument("fractional max pooling needs a cubic lattice");
  if (in.shape().m != regions.m_in) throw SizeMismatch("fractional pooling regions planned for a different size");
  std::array<std::vector<std::array<std::int32_t, 2>>, 3> cover;
  for (int d = 0; d < 3; ++d) cover[d] = region_cover(regions.starts[d], regions.m_in);
  std::vector<std::uint64_t> keys;
  for (std::uint64_t key : in.keys()) {
    const Site x = unpack_site(key);
    for (std::int32_t a : cover[0][x[0]]) {
      if (a < 0) continue;
      for (std::int32_t b : cover[1][x[1]]) {
        if (b < 0) continue;
        for (std::int32_t c : cover[2][x[2]]) {
          if (c >= 0) keys.push_back(pack_site({a, b, c}));
        }
      }
    }
  }
  return std::make_shared<SiteIndex>(
      SiteIndex::from_unsorted(GridShape{LatticeKind::cubic, regions.m_out}, std::move(keys)));
}

Rulebook fmp_rulebook(const SiteIndex& in, const SiteIndex& out, const FmpRegions& regions, std::int32_t row_base) {
  static const std::vector<Site> cube = filter_offsets(LatticeKind::cubic, 2);
  Rulebook rules;
  rules.rows = out.size();
  rules.footprint = static_cast<std::int64_t>(cube.size());
  rules.entries.resize(static_cast<std::size_t>(rules.rows * rules.footprint));
  for (std::int64_t r = 0; r < rules.rows; ++r) {
    const Site u = out.site(r);
    const Site base{regions.starts[0][u[0]], regions.starts[1][u[1]], regions.starts[2][u[2]]};
    for (std::size_t k = 0; k < cube.size(); ++k) {
      const std::int32_t idx = in.find(Site{base[0] + cube[k][0], base[1] + cube[k][1], base[2] + cube[k][2]});
      rules.entries[static_cast<std::size_t>(r * rules.footprint) + k] = idx < 0 ? -1 : idx + row_base;
    }
  }
  return rules;
}

template <typename T>
SparseGrid<T> fmp_forward(const SparseGrid<T>& grid, const FMPLayer& layer, std::uint64_t rng_state) {
  if (layer.lattice != LatticeKind::cubic || grid.shape().lattice != LatticeKind::cubic) {
    throw InvalidArgument("fractional max pooling is only defined on the cubic lattice");
  }
  const FmpRegions regions = fmp_regions(grid.shape().m, layer.ratio, rng_state);
  auto out = fmp_active_sites(grid.index(), regions);
  const Rulebook rules = fmp_rulebook(grid.index(), *out, regions);
  const int n = grid.features();
  std::vector<T> rows(static_cast<std::size_t>(rules.rows * n));
  std::vector<std::int32_t> argmax(rows.size());
  detail::pool_rows<T>(rules, grid.rows(), n, grid.ground(), rows.data(), argmax.data());
  return SparseGrid<T>(std::move(out), n, std::move(rows), grid.ground());
}

template <typename T>
SparseGrid<T> relu_forward(const SparseGrid<T>& grid) {
  std::vector<T> rows = grid.rows();
  std::vector<T> ground = grid.ground();
  kernels::relu(static_cast<std::int64_t>(rows.size()), rows.data());
  kernels::relu(static_cast<std::int64_t>(ground.size()), ground.data());
  return SparseGrid<T>(grid.index_ptr(), grid.features(), std::move(rows), std::move(ground));
}

template <typename T>
std::vector<T> classifier_forward(const SparseGrid<T>& grid, const ConvLayer<T>& head) {
  if (grid.shape().m != 1) {
    throw InvalidArgument("classifier needs spatial size 1, got " + std::to_string(grid.shape().m));
  }
  if (head.geometry.size() != 1 || head.n_in != grid.features()) {
    throw InvalidArgument("classifier head must be a size-1 filter over the final features");
  }
  const auto v = grid.value_at(Site{0, 0, 0});
  std::vector<T> logits(static_cast<std::size_t>(head.n_out));
  kernels::gemm(1, head.n_out, head.n_in, v.data(), head.n_in, head.weights.values.data(), head.n_out,
                head.bias.values.data(), logits.data(), head.n_out);
  return logits;
}

#define SPARSECNN_INSTANTIATE_OPS(T)                                                                            \
  template struct ConvLayer<T>;                                                                                 \
  template GatherPlan<T> build_gather(const SparseGrid<T>&, SiteIndexPtr, const FilterGeometry&);               \
  template SparseGrid<T> conv_forward(const SparseGrid<T>&, const ConvLayer<T>&);                               \
  template std::vector<T> conv_ground(std::span<const T>, const ConvLayer<T>&);                                 \
  template SparseGrid<T> pool_forward(const SparseGrid<T>&, const PoolLayer&);                                  \
  template SparseGrid<T> fmp_forward(const SparseGrid<T>&, const FMPLayer&, std::uint64_t);                     \
  template SparseGrid<T> relu_forward(const SparseGrid<T>&);                                                    \
  template std::vector<T> classifier_forward(const SparseGrid<T>&, const ConvLayer<T>&);                        \
  template void detail::gather_rows(const Rulebook&, std::span<const T>, int, std::span<const T>, T*);          \
  template void detail::matmul_bias(std::int64_t, std::int64_t, const T*, const ConvLayer<T>&, T*);             \
  template void detail::pool_rows(const Rulebook&, std::span<const T>, int, std::span<const T>, T*, std::int32_t*);

SPARSECNN_INSTANTIATE_OPS(float)
SPARSECNN_INSTANTIATE_OPS(double)

}  // namespace sparsecnn
