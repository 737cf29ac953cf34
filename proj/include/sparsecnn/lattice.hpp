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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sparsecnn {

enum class LatticeKind : std::uint8_t { square = 0, triangular = 1, cubic = 2, tetrahedral = 3 };

inline constexpr std::array<LatticeKind, 4> kAllLattices = {
    LatticeKind::square, LatticeKind::triangular, LatticeKind::cubic, LatticeKind::tetrahedral};

constexpr int dimension(LatticeKind kind) {
  return (kind == LatticeKind::square || kind == LatticeKind::triangular) ? 2 : 3;
}

// Triangular and tetrahedral lattices bound sites by a coordinate sum.
constexpr bool is_simplex(LatticeKind kind) {
  return kind == LatticeKind::triangular || kind == LatticeKind::tetrahedral;
}

std::string_view to_string(LatticeKind kind);
std::optional<LatticeKind> lattice_from_string(std::string_view name);

// Lattice coordinates. Two-dimensional lattices leave the last entry at 0.
using Site = std::array<std::int32_t, 3>;

// Maximum linear size representable in a packed site key.
inline constexpr std::int32_t kMaxLinearSize = 1 << 21;

// Packs a site into a 64-bit key, 21 bits per coordinate, first coordinate
// most significant so that key order is lexicographic site order.
constexpr std::uint64_t pack_site(const Site& site) {
  return (static_cast<std::uint64_t>(site[0]) << 42) | (static_cast<std::uint64_t>(site[1]) << 21) |
         static_cast<std::uint64_t>(site[2]);
}

constexpr Site unpack_site(std::uint64_t key) {
  constexpr std::uint64_t mask = (std::uint64_t{1} << 21) - 1;
  return {static_cast<std::int32_t>((key >> 42) & mask), static_cast<std::int32_t>((key >> 21) & mask),
          static_cast<std::int32_t>(key & mask)};
}

struct GridShape {
  LatticeKind lattice = LatticeKind::square;
  std::int32_t m = 1;

  int dim() const { return dimension(lattice); }
  bool contains(const Site& site) const;
  std::int64_t site_count() const;
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

std::int64_t filter_volume(LatticeKind lattice, int f);

// Canonical (lexicographic) offsets; this order fixes the row blocks of W.
std::vector<Site> filter_offsets(LatticeKind lattice, int f);

std::int64_t site_count(LatticeKind lattice, std::int32_t m);

// Valid-convolution output size (m_in - k) / s + 1. Throws SizeMismatch when
// the window does not fit or the stride does not divide; `layer` names the
// offending layer in the message.
std::int32_t out_size(std::int32_t m_in, std::int32_t k, std::int32_t s, std::string_view layer = {});

class FilterGeometry {
 public:
  FilterGeometry() = default;
  FilterGeometry(LatticeKind lattice, int f, int s);

  LatticeKind lattice() const { return lattice_; }
  int size() const { return f_; }
  int stride() const { return s_; }
  const std::vector<Site>& offsets() const { return offsets_; }
  std::int64_t volume() const { return static_cast<std::int64_t>(offsets_.size()); }

 private:
  LatticeKind lattice_ = LatticeKind::square;
  int f_ = 1;
  int s_ = 1;
  std::vector<Site> offsets_{Site{0, 0, 0}};
};

// All valid sites of a shape in lexicographic order.
std::vector<Site> enumerate_sites(const GridShape& shape);

// Position of `site` within enumerate_sites(shape).
std::int64_t lexicographic_rank(const GridShape& shape, const Site& site);

}  // namespace sparsecnn
