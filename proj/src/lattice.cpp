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

#include "sparsecnn/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "sparsecnn/errors.hpp"

namespace sparsecnn {

std::string_view to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::square: return "square";
    case LatticeKind::triangular: return "triangular";
    case LatticeKind::cubic: return "cubic";
    case LatticeKind::tetrahedral: return "tetrahedral";
  }
  return "unknown";
}

std::optional<LatticeKind> lattice_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (LatticeKind kind : kAllLattices) {
    if (lower == to_string(kind)) return kind;
  }
  return std::nullopt;
}

bool GridShape::contains(const Site& site) const {
  const int d = dim();
  std::int64_t sum = 0;
  for (int i = 0; i < 3; ++i) {
    if (i >= d) {
      if (site[i] != 0) return false;
      continue;
    }
    if (site[i] < 0 || site[i] >= m) return false;
    sum += site[i];
  }
  return !is_simplex(lattice) || sum <= m - 1;
}

std::int64_t GridShape::site_count() const { return sparsecnn::site_count(lattice, m); }

std::int64_t filter_volume(LatticeKind lattice, int f) {
  if (f < 1) throw InvalidArgument("filter size must be >= 1, got " + std::to_string(f));
  const std::int64_t n = f;
  switch (lattice) {
    case LatticeKind::square: return n * n;
    case LatticeKind::cubic: return n * n * n;
    case LatticeKind::triangular: return n * (n + 1) / 2;
    case LatticeKind::tetrahedral: return n * (n + 1) * (n + 2) / 6;
  }
  throw InternalError("unknown lattice kind");
}

std::vector<Site> filter_offsets(LatticeKind lattice, int f) {
  if (f < 1) throw InvalidArgument("filter size must be >= 1, got " + std::to_string(f));
  return enumerate_sites(GridShape{lattice, f});
}

std::int64_t site_count(LatticeKind lattice, std::int32_t m) {
  if (m < 1) throw InvalidArgument("grid size must be >= 1, got " + std::to_string(m));
  return filter_volume(lattice, m);
}

std::int32_t out_size(std::int32_t m_in, std::int32_t k, std::int32_t s, std::string_view layer) {
  const std::string where = layer.empty() ? std::string() : " in layer " + std::string(layer);
  if (k < 1 || s < 1) throw InvalidArgument("window and stride must be positive" + where);
  if (m_in < k) {
    throw SizeMismatch("input size " + std::to_string(m_in) + " smaller than window " + std::to_string(k) + where);
  }
  if ((m_in - k) % s != 0) {
    throw SizeMismatch("input size " + std::to_string(m_in) + " minus window " + std::to_string(k) +
                       " not divisible by stride " + std::to_string(s) + where);
  }
  return (m_in - k) / s + 1;
}

FilterGeometry::FilterGeometry(LatticeKind lattice, int f, int s)
    : lattice_(lattice), f_(f), s_(s), offsets_(filter_offsets(lattice, f)) {
  if (s < 1) throw InvalidArgument("stride must be >= 1, got " + std::to_string(s));
}

std::vector<Site> enumerate_sites(const GridShape& shape) {
  std::vector<Site> sites;
  sites.reserve(static_cast<std::size_t>(shape.site_count()));
  const std::int32_t m = shape.m;
  const bool simplex = is_simplex(shape.lattice);
  if (shape.dim() == 2) {
    for (std::int32_t x = 0; x < m; ++x) {
      const std::int32_t ymax = simplex ? m - 1 - x : m - 1;
      for (std::int32_t y = 0; y <= ymax; ++y) sites.push_back({x, y, 0});
    }
  } else {
    for (std::int32_t x = 0; x < m; ++x) {
      const std::int32_t ymax = simplex ? m - 1 - x : m - 1;
      for (std::int32_t y = 0; y <= ymax; ++y) {
        const std::int32_t zmax = simplex ? m - 1 - x - y : m - 1;
        for (std::int32_t z = 0; z <= zmax; ++z) sites.push_back({x, y, z});
      }
    }
  }
  return sites;
}

std::int64_t lexicographic_rank(const GridShape& shape, const Site& site) {
  const std::int64_t m = shape.m;
  const std::int64_t x = site[0], y = site[1], z = site[2];
  switch (shape.lattice) {
    case LatticeKind::square: return x * m + y;
    case LatticeKind::cubic: return (x * m + y) * m + z;
    case LatticeKind::triangular: {
      // Rows x' < x hold m - x' sites each.
      return x * m - x * (x - 1) / 2 + y;
    }
    case LatticeKind::tetrahedral: {
      std::int64_t rank = 0;
      for (std::int64_t xi = 0; xi < x; ++xi) rank += site_count(LatticeKind::triangular, static_cast<std::int32_t>(m - xi));
      const std::int64_t k = m - x;
      return rank + y * k - y * (y - 1) / 2 + z;
    }
  }
  throw InternalError("unknown lattice kind");
}

}  // namespace sparsecnn
