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

#include "sparsecnn/site_index.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "sparsecnn/errors.hpp"

namespace sparsecnn {

namespace {

// splitmix64 finalizer
inline std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::string describe(const Site& s) {
  return "(" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," + std::to_string(s[2]) + ")";
}

}  // namespace

SiteHashMap::SiteHashMap(std::size_t expected) {
  const std::size_t capacity = std::bit_ceil(std::max<std::size_t>(16, expected * 2));
  keys_.assign(capacity, kEmpty);
  values_.assign(capacity, -1);
  mask_ = capacity - 1;
}

bool SiteHashMap::insert(std::uint64_t key, std::int32_t value) {
  if (keys_.empty() || (size_ + 1) * 2 > keys_.size()) grow();
  std::uint64_t slot = mix(key) & mask_;
  while (keys_[slot] != kEmpty) {
    if (keys_[slot] == key) return false;
    slot = (slot + 1) & mask_;
  }
  keys_[slot] = key;
  values_[slot] = value;
  ++size_;
  return true;
}

std::int32_t SiteHashMap::find(std::uint64_t key) const {
  if (keys_.empty()) return -1;
  std::uint64_t slot = mix(key) & mask_;
  while (true) {
    const std::uint64_t k = keys_[slot];
    if (k == key) return values_[slot];
    if (k == kEmpty) return -1;
    slot = (slot + 1) & mask_;
  }
}

void SiteHashMap::grow() {
  SiteHashMap bigger(std::max<std::size_t>(16, keys_.size()));
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i] != kEmpty) bigger.insert(keys_[i], values_[i]);
  }
  *this = std::move(bigger);
}

SiteIndex::SiteIndex(GridShape shape, std::vector<std::uint64_t> keys)
    : shape_(shape), keys_(std::move(keys)), map_(keys_.size()) {
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (i > 0 && keys_[i] <= keys_[i - 1]) throw InvalidArgument("site keys must be strictly increasing");
    const Site s = unpack_site(keys_[i]);
    if (!shape_.contains(s)) throw InvalidArgument("site " + describe(s) + " outside grid");
    map_.insert(keys_[i], static_cast<std::int32_t>(i));
  }
}

SiteIndex SiteIndex::from_unsorted(GridShape shape, std::vector<std::uint64_t> keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return SiteIndex(shape, std::move(keys));
}

}  // namespace sparsecnn
