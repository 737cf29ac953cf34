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
#include <memory>
#include <span>
#include <vector>

#include "sparsecnn/lattice.hpp"

namespace sparsecnn {

// Open-addressing hash table from packed site keys to row numbers.
class SiteHashMap {
 public:
  SiteHashMap() = default;
  explicit SiteHashMap(std::size_t expected);

  // Returns false if the key was already present (the old value is kept).
  bool insert(std::uint64_t key, std::int32_t value);
  std::int32_t find(std::uint64_t key) const;  // -1 when absent
  std::size_t size() const { return size_; }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  void grow();

  std::vector<std::uint64_t> keys_;
  std::vector<std::int32_t> values_;
  std::size_t size_ = 0;
  std::uint64_t mask_ = 0;
};

// The active-site set of one layer: a bijection between active sites and
// row numbers 0..a-1. Rows follow lexicographic site order. Immutable once
// built, so it is shared between layers with identical activity.
class SiteIndex {
 public:
  SiteIndex() = default;
  // `keys` must be strictly increasing packed keys of valid sites.
  SiteIndex(GridShape shape, std::vector<std::uint64_t> keys);
  // Sorts and de-duplicates `keys` before indexing.
  static SiteIndex from_unsorted(GridShape shape, std::vector<std::uint64_t> keys);

  const GridShape& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(keys_.size()); }
  bool empty() const { return keys_.empty(); }
  std::span<const std::uint64_t> keys() const { return keys_; }
  Site site(std::int64_t row) const { return unpack_site(keys_[static_cast<std::size_t>(row)]); }

  std::int32_t find(std::uint64_t key) const { return map_.find(key); }
  std::int32_t find(const Site& site) const { return map_.find(pack_site(site)); }

 private:
  GridShape shape_;
  std::vector<std::uint64_t> keys_;
  SiteHashMap map_;
};

using SiteIndexPtr = std::shared_ptr<const SiteIndex>;

}  // namespace sparsecnn
