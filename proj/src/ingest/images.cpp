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
#include <string>

#include "sparsecnn/errors.hpp"
#include "sparsecnn/ingest.hpp"

namespace sparsecnn {

std::array<double, 2> Affine2::operator()(const std::array<double, 2>& p) const {
  return {a[0][0] * p[0] + a[0][1] * p[1] + t[0], a[1][0] * p[0] + a[1][1] * p[1] + t[1]};
}

Affine2 Affine2::inverse() const {
  const double d = det();
  if (!(std::abs(d) >= 1e-6)) throw InvalidArgument("singular affine transform (|det| < 1e-6)");
  Affine2 inv;
  inv.a = {{{a[1][1] / d, -a[0][1] / d}, {-a[1][0] / d, a[0][0] / d}}};
  inv.t = {-(inv.a[0][0] * t[0] + inv.a[0][1] * t[1]), -(inv.a[1][0] * t[0] + inv.a[1][1] * t[1])};
  return inv;
}

Affine2 operator*(const Affine2& f, const Affine2& g) {
  Affine2 h;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) h.a[i][j] = f.a[i][0] * g.a[0][j] + f.a[i][1] * g.a[1][j];
    h.t[i] = f.a[i][0] * g.t[0] + f.a[i][1] * g.t[1] + f.t[i];
  }
  return h;
}

Affine2 make_affine(const AugmentParams& params, const std::array<double, 2>& center) {
  const double c = std::cos(params.rotation), s = std::sin(params.rotation);
  // rotation * shear * scale
  const double m00 = c * params.scale;
  const double m01 = (c * params.shear - s) * params.scale;
  const double m10 = s * params.scale;
  const double m11 = (s * params.shear + c) * params.scale;
  Affine2 f;
  f.a = {{{m00, m01}, {m10, m11}}};
  f.t = {center[0] - (m00 * center[0] + m01 * center[1]) + params.translation[0],
         center[1] - (m10 * center[0] + m11 * center[1]) + params.translation[1]};
  if (std::abs(f.det()) < 1e-6) throw InvalidArgument("singular affine transform (|det| < 1e-6)");
  return f;
}

AugmentParams draw_augment(const AugmentRanges& ranges, Rng& rng) {
  AugmentParams p;
  p.rotation = rng.uniform(-ranges.rotation, ranges.rotation);
  p.scale = 1.0 + rng.uniform(-ranges.scale, ranges.scale);
  p.shear = rng.uniform(-ranges.shear, ranges.shear);
  p.translation = {rng.uniform(-ranges.translation, ranges.translation),
                   rng.uniform(-ranges.translation, ranges.translation)};
  return p;
}

void sample_bilinear(const DenseGrid<float>& image, double u, double v, float* out) {
  const std::int32_t m = image.shape.m;
  u = std::clamp(u, 0.0, static_cast<double>(m - 1));
  v = std::clamp(v, 0.0, static_cast<double>(m - 1));
  const auto x0 = static_cast<std::int32_t>(std::floor(u));
  const auto y0 = static_cast<std::int32_t>(std::floor(v));
  const std::int32_t x1 = std::min(x0 + 1, m - 1);
  const std::int32_t y1 = std::min(y0 + 1, m - 1);
  const double fu = u - x0, fv = v - y0;
  const auto p00 = image.at(Site{x0, y0, 0});
  const auto p10 = image.at(Site{x1, y0, 0});
  const auto p01 = image.at(Site{x0, y1, 0});
  const auto p11 = image.at(Site{x1, y1, 0});
  for (int c = 0; c < image.n; ++c) {
    out[c] = static_cast<float>((1 - fu) * (1 - fv) * p00[c] + fu * (1 - fv) * p10[c] + (1 - fu) * fv * p01[c] +
                                fu * fv * p11[c]);
  }
}

DenseGrid<float> affine_augment(const DenseGrid<float>& image, const Affine2& map) {
  if (image.shape.lattice != LatticeKind::square) throw InvalidArgument("image augmentation needs a square lattice");
  const Affine2 inv = map.inverse();
  const std::int32_t m = image.shape.m;
  const double c = 0.5 * (m - 1);
  DenseGrid<float> out(image.shape, image.n, 0.0f);
  for (std::int32_t x = 0; x < m; ++x) {
    for (std::int32_t y = 0; y < m; ++y) {
      const auto q = inv({x - c, y - c});
      const double u = q[0] + c, v = q[1] + c;
      if (u < -0.5 || u > m - 0.5 || v < -0.5 || v > m - 0.5) continue;
      sample_bilinear(image, u, v, out.at(Site{x, y, 0}).data());
    }
  }
  return out;
}

SparseGrid<float> square_to_triangular(const DenseGrid<float>& image, std::int32_t m_tri, const Affine2& placement) {
  if (image.shape.lattice != LatticeKind::square) throw InvalidArgument("source image must be on the square lattice");
  const double side = image.shape.m;
  const double h = std::sqrt(3.0) / 2;
  const std::array<double, 2> center{0.5 * (m_tri - 1), h + 0.5 * side};
  auto to_lattice = [&](const std::array<double, 2>& p) {
    const double y = p[1] / h;
    return std::array<double, 2>{p[0] - y / 2, y};
  };
  for (double sx : {-0.5, 0.5}) {
    for (double sy : {-0.5, 0.5}) {
      const auto q = placement({sx * side, sy * side});
      const auto l = to_lattice({q[0] + center[0], q[1] + center[1]});
      if (l[0] < -1e-9 || l[1] < -1e-9 || l[0] + l[1] > m_tri - 1 + 1e-9) {
        throw InvalidArgument("image footprint does not fit a triangular field of size " + std::to_string(m_tri));
      }
    }
  }
  const Affine2 inv = placement.inverse();
  const double c = 0.5 * (side - 1);
  const GridShape shape{LatticeKind::triangular, m_tri};
  std::vector<std::uint64_t> keys;
  std::vector<float> rows;
  std::vector<float> px(static_cast<std::size_t>(image.n));
  for (const Site& s : enumerate_sites(shape)) {
    const std::array<double, 2> plane{s[0] + 0.5 * s[1] - center[0], s[1] * h - center[1]};
    const auto w = inv(plane);
    const double u = w[0] + c, v = w[1] + c;
    if (u < -0.5 || u >= side - 0.5 || v < -0.5 || v >= side - 0.5) continue;
    sample_bilinear(image, u, v, px.data());
    keys.push_back(pack_site(s));
    rows.insert(rows.end(), px.begin(), px.end());
  }
  auto index = std::make_shared<SiteIndex>(shape, std::move(keys));
  return SparseGrid<float>(std::move(index), image.n, std::move(rows), std::vector<float>(px.size(), 0.0f));
}

std::vector<LabeledImage> load_cifar_batch(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  constexpr std::size_t kRecord = 3073;
  std::vector<LabeledImage> out;
  std::vector<unsigned char> buf(kRecord);
  while (in.read(reinterpret_cast<char*>(buf.data()), kRecord)) {
    if (buf[0] > 9) throw DataError(path + ": label " + std::to_string(buf[0]) + " out of range");
    LabeledImage item;
    item.label = buf[0];
    item.image = DenseGrid<float>(GridShape{LatticeKind::square, 32}, 3, 0.0f);
    for (std::int32_t row = 0; row < 32; ++row) {
      for (std::int32_t col = 0; col < 32; ++col) {
        auto v = item.image.at(Site{col, row, 0});
        for (int ch = 0; ch < 3; ++ch) v[ch] = buf[1 + ch * 1024 + row * 32 + col] / 255.0f;
      }
    }
    out.push_back(std::move(item));
  }
  if (in.gcount() != 0) throw DataError(path + ": truncated record (file size is not a multiple of 3073)");
  return out;
}

}  // namespace sparsecnn
