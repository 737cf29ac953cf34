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
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparsecnn/dataset.hpp"
#include "sparsecnn/lattice.hpp"
#include "sparsecnn/train.hpp"

namespace sparsecnn::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

// Where samples come from. `kind` is one of knots, mesh, strokes, video, cifar.
struct DataOptions {
  std::string kind = "knots";
  std::string path;        // directory or file list (comma separated for cifar)
  std::string test_path;
  std::uint64_t seed = 1;  // selects the samples, independent of the training seed
  int per_class = 300;     // knots only
  int test_per_class = 150;
  double threshold_pct = 12;
  std::int32_t sample_scale = 40;  // voxelization / space-time size for mesh and strokes
  bool random_rotation = false;
  AugmentRanges augment;
  std::size_t limit = 0;
};

struct TrainOptions {
  std::string arch;
  std::string lattice = "tetrahedral";
  std::int32_t scale = 20;
  int threads = 0;
  std::string out = "model.ckpt";
  std::string log;
  TrainConfig train;
  DataOptions data;
};

struct EvalOptions {
  std::string checkpoint;
  std::string arch;  // optional; must match the checkpoint when given
  std::int32_t scale = 20;
  int repeats = 1;
  std::uint64_t seed = 0;
  int threads = 0;
  bool json = false;
  std::string out;
  DataOptions data;
};

struct CountOpsOptions {
  std::string arch;
  std::string lattice = "square";
  std::int32_t scale = 0;
  int n_input = 1;
  int classes = 0;
  std::string mode = "dense";  // dense | geometric
  std::int32_t active_side = 32;
  std::vector<std::int64_t> activity;  // overrides mode when non-empty
  bool json = false;
};

struct VoxelizeOptions {
  std::string input;
  std::string kind = "auto";  // auto | off | svid | strokes | unknot | trefoil | figure_eight
  std::string lattice = "cubic";
  std::int32_t scale = 40;
  std::uint64_t seed = 0;
  double threshold_pct = 12;
  std::string out = "grid.bin";
};

struct DemoKnotOptions {
  std::string lattice = "cubic";
  std::int32_t scale = 40;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);
int cmd_count_ops(const CountOpsOptions& options, std::ostream& out, std::ostream& err);
int cmd_voxelize(const VoxelizeOptions& options, std::ostream& out, std::ostream& err);
int cmd_demo_knot(const DemoKnotOptions& options, std::ostream& out, std::ostream& err);

// Runs `body` and maps exceptions to exit codes, printing the message.
int guarded(std::ostream& err, const std::function<int()>& body);

}  // namespace sparsecnn::cli
