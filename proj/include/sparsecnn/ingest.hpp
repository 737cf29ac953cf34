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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsecnn/lattice.hpp"
#include "sparsecnn/rng.hpp"
#include "sparsecnn/sparse_grid.hpp"

namespace sparsecnn {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 identity3();
Mat3 multiply(const Mat3& a, const Mat3& b);
Vec3 apply(const Mat3& m, const Vec3& v);
double determinant(const Mat3& m);

// ---- meshes ---------------------------------------------------------------

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::int32_t, 3>> faces;
};

// ASCII OFF. '#' starts a comment. Faces with more than three vertices are
// fan-triangulated. Throws ParseError whose position is the 1-based line.
TriangleMesh load_off(std::string_view text);
TriangleMesh load_off_file(const std::string& path);

// Uniform random rotation from a normalized Gaussian quaternion.
Mat3 random_rotation(Rng& rng);

// Rotates, scales and centers the mesh so its bounding box fits inside a
// one-voxel margin, then marks every voxel touched by a surface sample.
// Triangles are subdivided until all edges are shorter than half a voxel.
SparseGrid<float> voxelize_mesh(const TriangleMesh& mesh, std::int32_t m, const Mat3& rotation);

// ---- paths ----------------------------------------------------------------

// Maps physical coordinates to lattice coordinates. Cubic is the identity;
// tetrahedral uses basis vectors (1,0,0), (1/2, sqrt3/2, 0),
// (1/2, sqrt3/6, sqrt(2/3)), so the field is a regular tetrahedron.
Vec3 physical_to_lattice(LatticeKind lattice, const Vec3& p);
Vec3 lattice_to_physical(LatticeKind lattice, const Vec3& x);

// Points are in lattice coordinates. Each segment is walked in
// ceil(max |delta|) equal steps and every step is rounded to the nearest
// site, so consecutive sites differ by at most one per axis. Visited sites
// get value 1. Throws InvalidArgument if a point rounds outside the field.
SparseGrid<float> rasterize_polyline(std::span<const Vec3> points, std::int32_t m,
                                     LatticeKind lattice = LatticeKind::cubic);

// Number of components under 26-connectivity (sites whose coordinates
// differ by at most one on every axis are neighbours).
std::int64_t connected_components(const SiteIndex& sites);

struct StrokeSample {
  std::vector<std::vector<std::array<double, 2>>> strokes;
  int label = 0;
};

// {"label": int, "strokes": [[[x, y], ...], ...]}
StrokeSample load_strokes_json(std::string_view text);
StrokeSample load_strokes_file(const std::string& path);

// x, y scaled uniformly and centered into [0, m - 1]; the third axis is the
// cumulative point index over all strokes, scaled to [0, m - 1]. Segments
// join consecutive points of one stroke only.
SparseGrid<float> strokes_to_spacetime(const StrokeSample& sample, std::int32_t m = 40);

// ---- video ----------------------------------------------------------------

struct FrameSequence {
  std::int32_t width = 0;
  std::int32_t height = 0;
  std::vector<std::vector<std::uint8_t>> frames;  // row-major grayscale
};

// "SVID", u32 width, u32 height, u32 frames, then the frames.
FrameSequence read_svid(std::istream& in);
FrameSequence read_svid_file(const std::string& path);
void write_svid(std::ostream& out, const FrameSequence& video);

// Site (x, y, t) is active when |frame[t+1] - frame[t]| at pixel (x, y)
// exceeds threshold_pct% of 255; its value is the signed difference / 255.
// The (W, H, T-1) box is centered in a cubic field of size `m` (0 picks the
// smallest field that holds it).
SparseGrid<float> frame_difference(const FrameSequence& video, double threshold_pct, std::int32_t m = 0);

// ---- images ---------------------------------------------------------------

// 2D affine map p -> a * p + t, acting on plane coordinates.
struct Affine2 {
  std::array<std::array<double, 2>, 2> a{{{1, 0}, {0, 1}}};
  std::array<double, 2> t{0, 0};

  std::array<double, 2> operator()(const std::array<double, 2>& p) const;
  Affine2 inverse() const;  // throws InvalidArgument when |det| < 1e-6
  double det() const { return a[0][0] * a[1][1] - a[0][1] * a[1][0]; }
};

// Composition: (f * g)(p) = f(g(p)).
Affine2 operator*(const Affine2& f, const Affine2& g);

struct AugmentParams {
  double rotation = 0;  // radians
  double scale = 1;
  double shear = 0;
  std::array<double, 2> translation{0, 0};
};

// Rotation * shear * scale about `center`, then translation.
Affine2 make_affine(const AugmentParams& params, const std::array<double, 2>& center = {0, 0});

// Ranges are symmetric magnitudes; zero everywhere yields the identity.
struct AugmentRanges {
  double rotation = 0;
  double scale = 0;
  double shear = 0;
  double translation = 0;

  bool zero() const { return rotation == 0 && scale == 0 && shear == 0 && translation == 0; }
};

AugmentParams draw_augment(const AugmentRanges& ranges, Rng& rng);

// Output pixel p samples the input bilinearly at map^-1(p) around the image
// center; samples outside the image read zero.
DenseGrid<float> affine_augment(const DenseGrid<float>& image, const Affine2& map);
std::vector<Vec3> affine_augment(std::span<const Vec3> points, const Mat3& linear, const Vec3& translation);

// Triangular site (x, y) sits at plane position (x + y/2, y * sqrt3/2). The
// image (one unit per pixel) is placed as an axis-aligned square centered
// horizontally, one row above the bottom edge; each covered site samples it
// bilinearly. `placement` is applied to the image square before placing it.
SparseGrid<float> square_to_triangular(const DenseGrid<float>& image, std::int32_t m_tri,
                                       const Affine2& placement = {});

// Bilinear sample at continuous pixel coordinates (u, v) with clamping at
// the border; `out` receives n channels.
void sample_bilinear(const DenseGrid<float>& image, double u, double v, float* out);

struct LabeledImage {
  DenseGrid<float> image;  // square lattice, 3 channels, values in [0, 1]
  int label = 0;
};

// CIFAR-10 binary batch: records of 1 label byte + 3072 channel-major bytes.
std::vector<LabeledImage> load_cifar_batch(const std::string& path);

// ---- synthetic knots ------------------------------------------------------

enum class KnotKind { unknot = 0, trefoil = 1, figure_eight = 2 };

const char* to_string(KnotKind kind);

// Closed parametric curve, centered at the origin with unit maximum radius.
std::vector<Vec3> knot_curve(KnotKind kind, std::size_t samples = 1024);

struct KnotSample {
  SparseGrid<float> grid;
  int label = 0;
};

// Randomly rotated, jittered knot of diameter `scale` (in lattice units;
// 0 uses the largest that fits) centered in a field of size m, rasterized as
// a closed loop.
KnotSample synth_knot(KnotKind kind, std::int32_t m, Rng& rng, LatticeKind lattice = LatticeKind::cubic,
                      double scale = 0);

// Same curve with an explicit rotation and jitter; used by synth_knot.
SparseGrid<float> render_knot(KnotKind kind, std::int32_t m, LatticeKind lattice, double diameter,
                              const Mat3& rotation, const Vec3& shift);

// Largest diameter of a sphere centered in the field (the inscribed sphere
// for tetrahedral fields), in physical units.
double field_inscribed_diameter(const GridShape& field);

}  // namespace sparsecnn
