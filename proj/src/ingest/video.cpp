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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "sparsecnn/errors.hpp"
#include "sparsecnn/ingest.hpp"

namespace sparsecnn {

FrameSequence read_svid(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "SVID") throw DataError("not an SVID video (bad magic)");
  FrameSequence video;
  const auto w = detail::read_le<std::uint32_t>(in, "video width");
  const auto h = detail::read_le<std::uint32_t>(in, "video height");
  const auto count = detail::read_le<std::uint32_t>(in, "frame count");
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) throw DataError("implausible video dimensions");
  video.width = static_cast<std::int32_t>(w);
  video.height = static_cast<std::int32_t>(h);
  const std::size_t pixels = static_cast<std::size_t>(w) * h;
  for (std::uint32_t f = 0; f < count; ++f) {
    auto& frame = video.frames.emplace_back(pixels);
    if (!in.read(reinterpret_cast<char*>(frame.data()), static_cast<std::streamsize>(pixels))) {
      throw DataError("truncated video: frame " + std::to_string(f) + " of " + std::to_string(count));
    }
  }
  return video;
}

FrameSequence read_svid_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_svid(in);
}

void write_svid(std::ostream& out, const FrameSequence& video) {
  out.write("SVID", 4);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(video.width));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(video.height));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(video.frames.size()));
  for (const auto& frame : video.frames) {
    out.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
  }
}

SparseGrid<float> frame_difference(const FrameSequence& video, double threshold_pct, std::int32_t m) {
  if (video.frames.size() < 2) throw InvalidArgument("frame differencing needs at least two frames");
  if (!(threshold_pct >= 0 && threshold_pct <= 100)) throw InvalidArgument("threshold must lie in [0, 100] percent");
  const std::size_t pixels = static_cast<std::size_t>(video.width) * static_cast<std::size_t>(video.height);
  for (const auto& f : video.frames) {
    if (f.size() != pixels) throw InvalidArgument("video frames differ in size");
  }
  const auto slices = static_cast<std::int32_t>(video.frames.size() - 1);
  if (m == 0) m = std::max({video.width, video.height, slices});
  if (video.width > m || video.height > m || slices > m) {
    throw InvalidArgument("video of " + std::to_string(video.width) + "x" + std::to_string(video.height) + "x" +
                          std::to_string(slices) + " does not fit a field of size " + std::to_string(m));
  }
  const Site offset{(m - video.width) / 2, (m - video.height) / 2, (m - slices) / 2};
  const double cut = threshold_pct / 100.0 * 255.0;

  std::vector<std::pair<std::uint64_t, float>> active;
  for (std::int32_t t = 0; t < slices; ++t) {
    const auto& a = video.frames[static_cast<std::size_t>(t)];
    const auto& b = video.frames[static_cast<std::size_t>(t) + 1];
    for (std::int32_t y = 0; y < video.height; ++y) {
      for (std::int32_t x = 0; x < video.width; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * video.width + x;
        const int diff = static_cast<int>(b[p]) - static_cast<int>(a[p]);
        if (diff != 0 && std::abs(diff) > cut) {
          active.emplace_back(pack_site({x + offset[0], y + offset[1], t + offset[2]}),
                              static_cast<float>(diff) / 255.0f);
        }
      }
    }
  }
  std::sort(active.begin(), active.end());
  std::vector<std::uint64_t> keys;
  std::vector<float> rows;
  keys.reserve(active.size());
  rows.reserve(active.size());
  for (const auto& [k, v] : active) {
    keys.push_back(k);
    rows.push_back(v);
  }
  auto index = std::make_shared<SiteIndex>(GridShape{LatticeKind::cubic, m}, std::move(keys));
  return SparseGrid<float>(std::move(index), 1, std::move(rows), {0.0f});
}

}  // namespace sparsecnn
