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
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "sparsecnn/errors.hpp"
#include "sparsecnn/ingest.hpp"

namespace sparsecnn {

Mat3 identity3() { return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Vec3 apply(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2], m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
          m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

double determinant(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

namespace {

class OffReader {
 public:
  explicit OffReader(std::string_view text) : text_(text) {}

  // Next non-empty line with comments stripped, split on whitespace.
  std::vector<std::string_view> next(const char* expecting) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      std::vector<std::string_view> tokens;
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
      }
      if (!tokens.empty()) return tokens;
    }
    fail(std::string("unexpected end of file, expected ") + expecting, line_ + 1);
  }

  [[noreturn]] void fail(const std::string& message, std::size_t line) const {
    throw ParseError("OFF line " + std::to_string(line) + ": " + message, line);
  }
  [[noreturn]] void fail(const std::string& message) const { fail(message, line_); }

  template <typename T>
  T number(std::string_view token) const {
    T value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      fail("expected a number, got '" + std::string(token) + "'");
    }
    return value;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

}  // namespace

TriangleMesh load_off(std::string_view text) {
  OffReader reader(text);
  auto tokens = reader.next("OFF header");
  if (tokens[0].substr(0, 3) != "OFF") reader.fail("missing OFF header");
  std::vector<std::string_view> counts(tokens.begin() + 1, tokens.end());
  // Some exporters glue the vertex count to the header ("OFF1024 ...").
  if (tokens[0].size() > 3) counts.insert(counts.begin(), tokens[0].substr(3));
  if (counts.empty()) counts = reader.next("vertex and face counts");
  if (counts.size() < 2) reader.fail("expected vertex and face counts");
  const auto nv = reader.number<std::int64_t>(counts[0]);
  const auto nf = reader.number<std::int64_t>(counts[1]);
  if (nv < 0 || nf < 0) reader.fail("negative element count");

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (std::int64_t i = 0; i < nv; ++i) {
    auto v = reader.next("vertex");
    if (v.size() < 3) reader.fail("vertex needs three coordinates");
    Vec3 p{reader.number<double>(v[0]), reader.number<double>(v[1]), reader.number<double>(v[2])};
    for (double c : p) {
      if (!std::isfinite(c)) reader.fail("non-finite vertex coordinate");
    }
    mesh.vertices.push_back(p);
  }
  for (std::int64_t i = 0; i < nf; ++i) {
    auto f = reader.next("face");
    const auto k = reader.number<std::int64_t>(f[0]);
    if (k < 3) reader.fail("face needs at least three vertices");
    if (static_cast<std::int64_t>(f.size()) < k + 1) reader.fail("face lists fewer indices than declared");
    std::vector<std::int32_t> idx;
    for (std::int64_t j = 1; j <= k; ++j) {
      const auto v = reader.number<std::int64_t>(f[static_cast<std::size_t>(j)]);
      if (v < 0 || v >= nv) reader.fail("vertex index " + std::to_string(v) + " out of range");
      idx.push_back(static_cast<std::int32_t>(v));
    }
    for (std::size_t j = 1; j + 1 < idx.size(); ++j) mesh.faces.push_back({idx[0], idx[j], idx[j + 1]});
  }
  return mesh;
}

TriangleMesh load_off_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_off(ss.str());
}

Mat3 random_rotation(Rng& rng) {
  double q[4];
  double norm = 0;
  do {
    norm = 0;
    for (double& c : q) {
      c = rng.normal();
      norm += c * c;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  const double w = q[0] / norm, x = q[1] / norm, y = q[2] / norm, z = q[3] / norm;
  return Mat3{{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
               {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
               {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

namespace {

void sample_triangle(const Vec3& a, const Vec3& b, const Vec3& c, std::int32_t m, std::vector<std::uint64_t>& keys,
                     int depth = 0) {
  auto dist2 = [](const Vec3& p, const Vec3& q) {
    return (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]);
  };
  auto mark = [&](const Vec3& p) {
    Site s{};
    for (int i = 0; i < 3; ++i) s[i] = std::clamp(static_cast<std::int32_t>(std::floor(p[i])), 0, m - 1);
    keys.push_back(pack_site(s));
  };
  if (depth > 40 || (dist2(a, b) < 0.25 && dist2(b, c) < 0.25 && dist2(a, c) < 0.25)) {
    mark(a);
    mark(b);
    mark(c);
    mark(Vec3{(a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3, (a[2] + b[2] + c[2]) / 3});
    return;
  }
  auto mid = [](const Vec3& p, const Vec3& q) { return Vec3{(p[0] + q[0]) / 2, (p[1] + q[1]) / 2, (p[2] + q[2]) / 2}; };
  const Vec3 ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
  sample_triangle(a, ab, ca, m, keys, depth + 1);
  sample_triangle(ab, b, bc, m, keys, depth + 1);
  sample_triangle(ca, bc, c, m, keys, depth + 1);
  sample_triangle(ab, bc, ca, m, keys, depth + 1);
}

}  // namespace

SparseGrid<float> voxelize_mesh(const TriangleMesh& mesh, std::int32_t m, const Mat3& rotation) {
  if (mesh.faces.empty() || mesh.vertices.empty()) throw InvalidArgument("cannot voxelize an empty mesh");
  if (m < 2 || m >= kMaxLinearSize) throw InvalidArgument("voxel grid size must be at least 2");
  for (const auto& f : mesh.faces) {
    for (std::int32_t v : f) {
      if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertices.size()) throw InvalidArgument("face index out of range");
    }
  }
  std::vector<Vec3> pts;
  pts.reserve(mesh.vertices.size());
  Vec3 lo{INFINITY, INFINITY, INFINITY}, hi{-INFINITY, -INFINITY, -INFINITY};
  for (const Vec3& v : mesh.vertices) {
    const Vec3 p = apply(rotation, v);
    for (int i = 0; i < 3; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
    pts.push_back(p);
  }
  const double extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
  if (!(extent > 0)) throw InvalidArgument("mesh is degenerate (zero extent)");
  const double scale = (m - 2) * (1 - 1e-9) / extent;
  const double half = 0.5 * m;
  for (Vec3& p : pts) {
    for (int i = 0; i < 3; ++i) p[i] = (p[i] - 0.5 * (lo[i] + hi[i])) * scale + half;
  }
  std::vector<std::uint64_t> keys;
  for (const auto& f : mesh.faces) sample_triangle(pts[f[0]], pts[f[1]], pts[f[2]], m, keys);
  auto index = std::make_shared<SiteIndex>(SiteIndex::from_unsorted(GridShape{LatticeKind::cubic, m}, std::move(keys)));
  std::vector<float> rows(static_cast<std::size_t>(index->size()), 1.0f);
  return SparseGrid<float>(std::move(index), 1, std::move(rows), {0.0f});
}

std::vector<Vec3> affine_augment(std::span<const Vec3> points, const Mat3& linear, const Vec3& translation) {
  if (std::abs(determinant(linear)) < 1e-6) throw InvalidArgument("singular affine transform");
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points) {
    Vec3 q = apply(linear, p);
    for (int i = 0; i < 3; ++i) q[i] += translation[i];
    out.push_back(q);
  }
  return out;
}

}  // namespace sparsecnn
