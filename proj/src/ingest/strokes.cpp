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
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sparsecnn/errors.hpp"
#include "sparsecnn/ingest.hpp"

namespace sparsecnn {

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt23 = std::sqrt(2.0 / 3.0);

}  // namespace

Vec3 physical_to_lattice(LatticeKind lattice, const Vec3& p) {
  switch (lattice) {
    case LatticeKind::square:
    case LatticeKind::cubic:
      return p;
    case LatticeKind::triangular: {
      const double y = p[1] / (kSqrt3 / 2);
      return {p[0] - y / 2, y, 0};
    }
    case LatticeKind::tetrahedral: {
      const double z = p[2] / kSqrt23;
      const double y = (p[1] - z * kSqrt3 / 6) / (kSqrt3 / 2);
      return {p[0] - y / 2 - z / 2, y, z};
    }
  }
  throw InternalError("unknown lattice");
}

Vec3 lattice_to_physical(LatticeKind lattice, const Vec3& x) {
  switch (lattice) {
    case LatticeKind::square:
    case LatticeKind::cubic:
      return x;
    case LatticeKind::triangular:
      return {x[0] + x[1] / 2, x[1] * kSqrt3 / 2, 0};
    case LatticeKind::tetrahedral:
      return {x[0] + x[1] / 2 + x[2] / 2, x[1] * kSqrt3 / 2 + x[2] * kSqrt3 / 6, x[2] * kSqrt23};
  }
  throw InternalError("unknown lattice");
}

SparseGrid<float> rasterize_polyline(std::span<const Vec3> points, std::int32_t m, LatticeKind lattice) {
  if (points.empty()) throw InvalidArgument("polyline needs at least one point");
  const GridShape shape{lattice, m};
  if (m < 1 || m >= kMaxLinearSize) throw InvalidArgument("grid size out of range");
  const int d = dimension(lattice);
  std::vector<std::uint64_t> keys;
  auto visit = [&](const Vec3& p) {
    Site s{0, 0, 0};
    for (int i = 0; i < 3; ++i) {
      const double r = std::round(p[i]);
      if (!std::isfinite(r) || std::abs(r) > kMaxLinearSize) throw InvalidArgument("polyline point is not finite");
      s[i] = static_cast<std::int32_t>(r);
      if (i >= d && s[i] != 0) throw InvalidArgument("polyline leaves the plane of a 2D lattice");
    }
    if (!shape.contains(s)) {
      throw InvalidArgument("polyline point (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) + ", " +
                            std::to_string(p[2]) + ") lies outside the field");
    }
    keys.push_back(pack_site(s));
  };
  visit(points[0]);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Vec3& a = points[i - 1];
    const Vec3& b = points[i];
    const double span = std::max({std::abs(b[0] - a[0]), std::abs(b[1] - a[1]), std::abs(b[2] - a[2])});
    const auto steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(span)));
    for (std::int64_t k = 1; k <= steps; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(steps);
      visit(Vec3{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])});
    }
  }
  auto index = std::make_shared<SiteIndex>(SiteIndex::from_unsorted(shape, std::move(keys)));
  std::vector<float> rows(static_cast<std::size_t>(index->size()), 1.0f);
  return SparseGrid<float>(std::move(index), 1, std::move(rows), {0.0f});
}

std::int64_t connected_components(const SiteIndex& sites) {
  const std::int64_t n = sites.size();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> stack;
  std::int64_t components = 0;
  for (std::int64_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    ++components;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const Site s = sites.site(stack.back());
      stack.pop_back();
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            const Site t{s[0] + dx, s[1] + dy, s[2] + dz};
            if (t[0] < 0 || t[1] < 0 || t[2] < 0) continue;
            const std::int32_t r = sites.find(t);
            if (r >= 0 && !seen[r]) {
              seen[r] = 1;
              stack.push_back(r);
            }
          }
        }
      }
    }
  }
  return components;
}

StrokeSample load_strokes_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("stroke file: ") + e.what(), e.byte);
  }
  StrokeSample sample;
  try {
    sample.label = doc.at("label").get<int>();
    for (const auto& stroke : doc.at("strokes")) {
      auto& out = sample.strokes.emplace_back();
      for (const auto& pt : stroke) {
        if (!pt.is_array() || pt.size() < 2) throw DataError("stroke point must be [x, y]");
        const double x = pt[0].get<double>();
        const double y = pt[1].get<double>();
        if (!std::isfinite(x) || !std::isfinite(y)) throw DataError("stroke coordinates must be finite");
        out.push_back({x, y});
      }
      if (out.empty()) throw DataError("stroke with no points");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("stroke file: ") + e.what());
  }
  return sample;
}

StrokeSample load_strokes_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_strokes_json(ss.str());
}

SparseGrid<float> strokes_to_spacetime(const StrokeSample& sample, std::int32_t m) {
  std::size_t total = 0;
  double lo[2] = {INFINITY, INFINITY}, hi[2] = {-INFINITY, -INFINITY};
  for (const auto& stroke : sample.strokes) {
    for (const auto& p : stroke) {
      for (int i = 0; i < 2; ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
    }
    total += stroke.size();
  }
  if (total == 0) throw InvalidArgument("stroke sample has no points");
  if (m < 2) throw InvalidArgument("space-time grid size must be at least 2");
  const double extent = std::max(hi[0] - lo[0], hi[1] - lo[1]);
  const double scale = extent > 0 ? (m - 1) / extent : 0.0;
  const double half = 0.5 * (m - 1);
  const double dt = total > 1 ? static_cast<double>(m - 1) / static_cast<double>(total - 1) : 0.0;

  std::vector<std::uint64_t> keys;
  std::size_t t = 0;
  for (const auto& stroke : sample.strokes) {
    std::vector<Vec3> path;
    for (const auto& p : stroke) {
      path.push_back(Vec3{(p[0] - 0.5 * (lo[0] + hi[0])) * scale + half, (p[1] - 0.5 * (lo[1] + hi[1])) * scale + half,
                          static_cast<double>(t++) * dt});
    }
    if (path.empty()) continue;
    const SparseGrid<float> part = rasterize_polyline(path, m, LatticeKind::cubic);
    keys.insert(keys.end(), part.index().keys().begin(), part.index().keys().end());
  }
  auto index =
      std::make_shared<SiteIndex>(SiteIndex::from_unsorted(GridShape{LatticeKind::cubic, m}, std::move(keys)));
  std::vector<float> rows(static_cast<std::size_t>(index->size()), 1.0f);
  return SparseGrid<float>(std::move(index), 1, std::move(rows), {0.0f});
}

}  // namespace sparsecnn
