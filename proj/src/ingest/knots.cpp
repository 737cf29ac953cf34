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
#include <numbers>
#include <string>

#include "sparsecnn/errors.hpp"
#include "sparsecnn/ingest.hpp"

namespace sparsecnn {

namespace {

// Keeps rounded lattice points inside the field.
constexpr double kRasterMargin = 2.0;

}  // namespace

const char* to_string(KnotKind kind) {
  switch (kind) {
    case KnotKind::unknot: return "unknot";
    case KnotKind::trefoil: return "trefoil";
    case KnotKind::figure_eight: return "figure_eight";
  }
  return "?";
}

std::vector<Vec3> knot_curve(KnotKind kind, std::size_t samples) {
  if (samples < 3) throw InvalidArgument("knot curve needs at least three samples");
  std::vector<Vec3> pts(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(samples);
    switch (kind) {
      case KnotKind::unknot:
        pts[i] = {std::cos(t), std::sin(t), 0};
        break;
      case KnotKind::trefoil:
        pts[i] = {std::sin(t) + 2 * std::sin(2 * t), std::cos(t) - 2 * std::cos(2 * t), -std::sin(3 * t)};
        break;
      case KnotKind::figure_eight:
        pts[i] = {(2 + std::cos(2 * t)) * std::cos(3 * t), (2 + std::cos(2 * t)) * std::sin(3 * t), std::sin(4 * t)};
        break;
    }
  }
  Vec3 mean{0, 0, 0};
  for (const Vec3& p : pts)
    for (int k = 0; k < 3; ++k) mean[k] += p[k] / static_cast<double>(samples);
  double radius = 0;
  for (Vec3& p : pts) {
    for (int k = 0; k < 3; ++k) p[k] -= mean[k];
    radius = std::max(radius, std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
  }
  for (Vec3& p : pts)
    for (double& c : p) c /= radius;
  return pts;
}

double field_inscribed_diameter(const GridShape& field) {
  const double a = field.m - 1;
  switch (field.lattice) {
    case LatticeKind::square:
    case LatticeKind::cubic:
      return a;
    case LatticeKind::triangular:
      return a / std::sqrt(3.0);
    case LatticeKind::tetrahedral:
      return a / std::sqrt(6.0);
  }
  return 0;
}

SparseGrid<float> render_knot(KnotKind kind, std::int32_t m, LatticeKind lattice, double diameter,
                              const Mat3& rotation, const Vec3& shift) {
  if (dimension(lattice) != 3) throw InvalidArgument("knots need a three-dimensional lattice");
  const double c = is_simplex(lattice) ? (m - 1) / 4.0 : (m - 1) / 2.0;
  const Vec3 center = lattice_to_physical(lattice, Vec3{c, c, c});
  std::vector<Vec3> path;
  const std::size_t samples = std::max<std::size_t>(256, static_cast<std::size_t>(32 * diameter));
  for (const Vec3& p : knot_curve(kind, samples)) {
    const Vec3 r = apply(rotation, p);
    Vec3 q;
    for (int k = 0; k < 3; ++k) q[k] = center[k] + shift[k] + 0.5 * diameter * r[k];
    path.push_back(physical_to_lattice(lattice, q));
  }
  path.push_back(path.front());
  return rasterize_polyline(path, m, lattice);
}

KnotSample synth_knot(KnotKind kind, std::int32_t m, Rng& rng, LatticeKind lattice, double scale) {
  if (m < 16) throw InvalidArgument("knot field must be at least 16");
  const double room = field_inscribed_diameter(GridShape{lattice, m}) - kRasterMargin;
  if (scale <= 0) scale = room;
  if (scale > room) {
    throw InvalidArgument("knot of diameter " + std::to_string(scale) + " does not fit a field of size " +
                          std::to_string(m));
  }
  const Mat3 rotation = random_rotation(rng);
  const double diameter = scale * rng.uniform(0.85, 1.0);
  const double slack = 0.5 * (room - diameter) / std::sqrt(3.0);
  const Vec3 shift{rng.uniform(-slack, slack), rng.uniform(-slack, slack), rng.uniform(-slack, slack)};
  return KnotSample{render_knot(kind, m, lattice, diameter, rotation, shift), static_cast<int>(kind)};
}

}  // namespace sparsecnn
