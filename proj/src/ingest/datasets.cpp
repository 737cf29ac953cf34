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
#include <filesystem>

#include "sparsecnn/dataset.hpp"
#include "sparsecnn/errors.hpp"

namespace sparsecnn {

namespace fs = std::filesystem;

namespace {

// Sorted class subdirectories of `root` and the sorted files with extension
// `ext` inside each.
std::vector<std::pair<std::string, std::vector<fs::path>>> class_directories(const std::string& root,
                                                                            const std::string& ext) {
  if (!fs::is_directory(root)) throw DataError("dataset directory " + root + " does not exist");
  std::vector<std::pair<std::string, std::vector<fs::path>>> out;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    out.emplace_back(dir.filename().string(), std::move(files));
  }
  if (out.empty()) throw DataError("no class subdirectories under " + root);
  return out;
}

void require_field(const GridShape& field, LatticeKind lattice, const char* what) {
  if (field.lattice != lattice) {
    throw InvalidArgument(std::string(what) + " samples need a " + std::string(to_string(lattice)) + " field, network uses " +
                          std::string(to_string(field.lattice)));
  }
}

}  // namespace

KnotDataset::KnotDataset(const KnotDatasetConfig& config) : config_(config) {
  if (config.per_class < 1) throw InvalidArgument("knot dataset needs at least one sample per class");
  if (dimension(config.lattice) != 3) throw InvalidArgument("knot dataset needs a three-dimensional lattice");
  for (int i = 0; i < 3 * config.per_class; ++i) {
    Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(i)}));
    Item item;
    item.kind = static_cast<KnotKind>(i % 3);
    item.rotation = random_rotation(rng);
    item.diameter = config.scale * rng.uniform(0.85, 1.0);
    // Unit-cube direction; scaled by the room left in the field at render time.
    item.shift = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    items_.push_back(item);
  }
}

SparseGrid<float> KnotDataset::sample(std::size_t i, std::uint64_t view, const GridShape& field) const {
  require_field(field, config_.lattice, "knot");
  const Item& item = items_.at(i);
  const double room = field_inscribed_diameter(field) - 2.0;
  if (config_.scale > room) {
    throw InvalidArgument("knots of scale " + std::to_string(config_.scale) + " do not fit a " +
                          std::string(to_string(field.lattice)) + " field of size " + std::to_string(field.m));
  }
  const double slack = 0.5 * (room - item.diameter) / std::sqrt(3.0);
  const Vec3 shift{item.shift[0] * slack, item.shift[1] * slack, item.shift[2] * slack};
  Mat3 rotation = item.rotation;
  if (config_.augment_rotation) {
    Rng rng(view);
    rotation = multiply(random_rotation(rng), rotation);
  }
  return render_knot(item.kind, field.m, field.lattice, item.diameter, rotation, shift);
}

MeshDataset::MeshDataset(const MeshDatasetConfig& config) : config_(config) {
  int label = 0;
  for (auto& [name, files] : class_directories(config.root, ".off")) {
    class_names_.push_back(name);
    for (const auto& f : files) {
      meshes_.push_back(load_off_file(f.string()));
      labels_.push_back(label);
    }
    ++label;
  }
}

SparseGrid<float> MeshDataset::sample(std::size_t i, std::uint64_t view, const GridShape& field) const {
  require_field(field, LatticeKind::cubic, "mesh");
  Mat3 rotation = identity3();
  if (config_.random_rotation) {
    Rng rng(view);
    rotation = random_rotation(rng);
  }
  return embed_centered(voxelize_mesh(meshes_.at(i), config_.scale, rotation), field);
}

StrokeDataset::StrokeDataset(const StrokeDatasetConfig& config) : config_(config) {
  if (!fs::is_directory(config.root)) throw DataError("dataset directory " + config.root + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(config.root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    samples_.push_back(load_strokes_file(f.string()));
    if (samples_.back().label < 0) throw DataError(f.string() + ": negative label");
    classes_ = std::max(classes_, samples_.back().label + 1);
  }
  if (samples_.empty()) throw DataError("no stroke files under " + config.root);
}

SparseGrid<float> StrokeDataset::sample(std::size_t i, std::uint64_t view, const GridShape& field) const {
  require_field(field, LatticeKind::cubic, "stroke");
  StrokeSample s = samples_.at(i);
  if (!config_.augment.zero()) {
    double lo[2] = {INFINITY, INFINITY}, hi[2] = {-INFINITY, -INFINITY};
    for (const auto& stroke : s.strokes) {
      for (const auto& p : stroke) {
        for (int k = 0; k < 2; ++k) {
          lo[k] = std::min(lo[k], p[k]);
          hi[k] = std::max(hi[k], p[k]);
        }
      }
    }
    Rng rng(view);
    const Affine2 map = make_affine(draw_augment(config_.augment, rng), {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])});
    for (auto& stroke : s.strokes)
      for (auto& p : stroke) p = map(p);
  }
  return embed_centered(strokes_to_spacetime(s, config_.scale), field);
}

VideoDataset::VideoDataset(const VideoDatasetConfig& config) {
  int label = 0;
  for (auto& [name, files] : class_directories(config.root, ".svid")) {
    class_names_.push_back(name);
    for (const auto& f : files) {
      grids_.push_back(frame_difference(read_svid_file(f.string()), config.threshold_pct));
      labels_.push_back(label);
    }
    ++label;
  }
}

SparseGrid<float> VideoDataset::sample(std::size_t i, std::uint64_t, const GridShape& field) const {
  require_field(field, LatticeKind::cubic, "video");
  const SparseGrid<float>& g = grids_.at(i);
  const std::int32_t shift = (field.m - g.shape().m) / 2;
  return embed(g, field, Site{shift, shift, shift});
}

CifarDataset::CifarDataset(const CifarDatasetConfig& config) : config_(config) {
  for (const auto& f : config.files) {
    auto batch = load_cifar_batch(f);
    for (auto& item : batch) {
      if (config.limit && images_.size() >= config.limit) break;
      images_.push_back(std::move(item));
    }
  }
  if (images_.empty()) throw DataError("no CIFAR images loaded");
}

SparseGrid<float> CifarDataset::sample(std::size_t i, std::uint64_t view, const GridShape& field) const {
  const DenseGrid<float>* image = &images_.at(i).image;
  DenseGrid<float> augmented;
  if (!config_.augment.zero()) {
    Rng rng(view);
    augmented = affine_augment(*image, make_affine(draw_augment(config_.augment, rng)));
    image = &augmented;
  }
  if (field.lattice == LatticeKind::triangular) return square_to_triangular(*image, field.m);
  require_field(field, LatticeKind::square, "image");
  const std::vector<float> zero(3, 0.0f);
  const std::int32_t shift = (field.m - image->shape.m) / 2;
  return embed(from_dense<float>(*image, zero), field, Site{shift, shift, 0});
}

}  // namespace sparsecnn
