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
#include <string>
#include <vector>

#include "sparsecnn/ingest.hpp"
#include "sparsecnn/sparse_grid.hpp"

namespace sparsecnn {

// Labeled samples rendered on demand into a network's input field.
// Implementations are immutable after construction and safe to call from
// several threads.
class Dataset {
 public:
  virtual ~Dataset() = default;

  virtual std::size_t size() const = 0;
  virtual int classes() const = 0;
  virtual int features() const { return 1; }
  virtual int label(std::size_t i) const = 0;

  // `view` seeds the augmentation draw. With augmentation disabled the
  // result does not depend on it.
  virtual SparseGrid<float> sample(std::size_t i, std::uint64_t view, const GridShape& field) const = 0;
};

// Unknot / trefoil / figure-eight, each sample with its own random pose.
struct KnotDatasetConfig {
  int per_class = 300;
  std::uint64_t seed = 1;
  LatticeKind lattice = LatticeKind::tetrahedral;
  double scale = 20;          // knot diameter in lattice units
  bool augment_rotation = false;  // extra random rotation per view
};

class KnotDataset : public Dataset {
 public:
  explicit KnotDataset(const KnotDatasetConfig& config);

  std::size_t size() const override { return items_.size(); }
  int classes() const override { return 3; }
  int label(std::size_t i) const override { return static_cast<int>(items_.at(i).kind); }
  SparseGrid<float> sample(std::size_t i, std::uint64_t view, const GridShape& field) const override;

 private:
  struct Item {
    KnotKind kind;
    Mat3 rotation;
    double diameter;
    Vec3 shift;
  };
  KnotDatasetConfig config_;
  std::vector<Item> items_;
};

// root/<class>/*.off; classes are the sorted subdirectory names.
struct MeshDatasetConfig {
  std::string root;
  std::int32_t scale = 40;   // voxelization size before embedding
  bool random_rotation = true;
};

class MeshDataset : public Dataset {
 public:
  explicit MeshDataset(const MeshDatasetConfig& config);

  std::size_t size() const override { return meshes_.size(); }
  int classes() const override { return static_cast<int>(class_names_.size()); }
  int label(std::size_t i) const override { return labels_.at(i); }
  SparseGrid<float> sample(std::size_t i, std::uint64_t view, const GridShape& field) const override;
  const std::vector<std::string>& class_names() const { return class_names_; }

 private:
  MeshDatasetConfig config_;
  std::vector<std::string> class_names_;
  std::vector<TriangleMesh> meshes_;
  std::vector<int> labels_;
};

// Every *.json stroke file below root.
struct StrokeDatasetConfig {
  std::string root;
  std::int32_t scale = 40;
  AugmentRanges augment;
};

class StrokeDataset : public Dataset {
 public:
  explicit StrokeDataset(const StrokeDatasetConfig& config);

  std::size_t size() const override { return samples_.size(); }
  int classes() const override { return classes_; }
  int label(std::size_t i) const override { return samples_.at(i).label; }
  SparseGrid<float> sample(std::size_t i, std::uint64_t view, const GridShape& field) const override;

 private:
  StrokeDatasetConfig config_;
  std::vector<StrokeSample> samples_;
  int classes_ = 0;
};

// root/<class>/*.svid, differenced at a fixed threshold.
struct VideoDatasetConfig {
  std::string root;
  double threshold_pct = 12;
};

class VideoDataset : public Dataset {
 public:
  explicit VideoDataset(const VideoDatasetConfig& config);

  std::size_t size() const override { return grids_.size(); }
  int classes() const override { return static_cast<int>(class_names_.size()); }
  int label(std::size_t i) const override { return labels_.at(i); }
  SparseGrid<float> sample(std::size_t i, std::uint64_t view, const GridShape& field) const override;

 private:
  std::vector<std::string> class_names_;
  std::vector<SparseGrid<float>> grids_;
  std::vector<int> labels_;
};

// CIFAR-10 binary batches placed on the square or triangular lattice.
struct CifarDatasetConfig {
  std::vector<std::string> files;
  AugmentRanges augment;
  std::size_t limit = 0;  // keep only the first `limit` images (0 = all)
};

class CifarDataset : public Dataset {
 public:
  explicit CifarDataset(const CifarDatasetConfig& config);

  std::size_t size() const override { return images_.size(); }
  int classes() const override { return 10; }
  int features() const override { return 3; }
  int label(std::size_t i) const override { return images_.at(i).label; }
  SparseGrid<float> sample(std::size_t i, std::uint64_t view, const GridShape& field) const override;

 private:
  CifarDatasetConfig config_;
  std::vector<LabeledImage> images_;
};

}  // namespace sparsecnn
