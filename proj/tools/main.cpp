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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace sparsecnn;
using namespace sparsecnn::cli;

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--dataset", d.kind, "knots, mesh, strokes, video or cifar")->capture_default_str();
  cmd->add_option("--data", d.path, "dataset directory (comma-separated batch files for cifar)");
  cmd->add_option("--test-data", d.test_path, "held-out dataset directory");
  cmd->add_option("--data-seed", d.seed, "seed selecting the synthetic samples")->capture_default_str();
  cmd->add_option("--per-class", d.per_class, "synthetic training samples per class")->capture_default_str();
  cmd->add_option("--test-per-class", d.test_per_class, "synthetic held-out samples per class")->capture_default_str();
  cmd->add_option("--threshold-pct", d.threshold_pct, "frame-difference threshold, percent of 255")
      ->capture_default_str();
  cmd->add_option("--sample-scale", d.sample_scale, "voxelization size for meshes and strokes")->capture_default_str();
  cmd->add_flag("--random-rotation", d.random_rotation, "rotate 3D samples randomly per view");
  cmd->add_option("--aug-rotation", d.augment.rotation, "image/stroke rotation range (radians)");
  cmd->add_option("--aug-scale", d.augment.scale, "relative scale range");
  cmd->add_option("--aug-shear", d.augment.shear, "shear range");
  cmd->add_option("--aug-translation", d.augment.translation, "translation range (pixels)");
  cmd->add_option("--limit", d.limit, "use only the first N images");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse convolutional networks on square, triangular, cubic and tetrahedral lattices"};
  app.require_subcommand(1);
  // Keys are option names without dashes, under a [command] section or
  // prefixed "command."; command-line flags override them.
  app.set_config("--config", "", "key=value configuration file (flags take precedence)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "train a network and write a checkpoint");
  train_cmd->add_option("--arch", train.arch, "architecture, e.g. 32C2-MP3/2-64C2-output");
  train_cmd->add_option("--lattice", train.lattice, "square, triangular, cubic or tetrahedral")->capture_default_str();
  train_cmd->add_option("--scale", train.scale, "object size in lattice units")->capture_default_str();
  train_cmd->add_option("--threads", train.threads, "worker threads (0 = hardware)");
  train_cmd->add_option("--out", train.out, "checkpoint path")->capture_default_str();
  train_cmd->add_option("--log", train.log, "also write the epoch log here");
  train_cmd->add_option("--seed", train.train.seed, "training seed")->capture_default_str();
  train_cmd->add_option("--epochs", train.train.epochs)->capture_default_str();
  train_cmd->add_option("--batch", train.train.batch_size)->capture_default_str();
  train_cmd->add_option("--lr", train.train.lr)->capture_default_str();
  train_cmd->add_option("--momentum", train.train.momentum)->capture_default_str();
  train_cmd->add_option("--weight-decay", train.train.weight_decay)->capture_default_str();
  train_cmd->add_option("--lr-decay", train.train.lr_decay, "per-epoch learning-rate factor")->capture_default_str();
  train_cmd->add_option("--target-accuracy", train.train.target_accuracy, "stop once held-out accuracy reaches this");
  train_cmd->add_option("--repeats", train.train.test_repeats, "n-fold testing during training")->capture_default_str();
  add_data_options(train_cmd, train.data);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint with n-fold repetitive testing");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint written by train");
  eval_cmd->add_option("--arch", eval.arch, "expected architecture (optional)");
  eval_cmd->add_option("--scale", eval.scale, "object size in lattice units")->capture_default_str();
  eval_cmd->add_option("--repeats", eval.repeats, "evaluations averaged per sample")->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "augmentation seed")->capture_default_str();
  eval_cmd->add_option("--threads", eval.threads, "worker threads (0 = hardware)");
  eval_cmd->add_flag("--json", eval.json, "print the report as JSON");
  eval_cmd->add_option("--out", eval.out, "write the full JSON report (with per-sample outputs) here");
  add_data_options(eval_cmd, eval.data);

  CountOpsOptions ops;
  auto* ops_cmd = app.add_subcommand("count-ops", "plan a network and count multiply-accumulates");
  ops_cmd->add_option("--arch", ops.arch, "architecture string");
  ops_cmd->add_option("--lattice", ops.lattice)->capture_default_str();
  ops_cmd->add_option("--scale", ops.scale, "input scale (fractional pooling networks)");
  ops_cmd->add_option("--n-input", ops.n_input, "input features")->capture_default_str();
  ops_cmd->add_option("--classes", ops.classes, "output classes")->capture_default_str();
  ops_cmd->add_option("--mode", ops.mode, "dense or geometric")->capture_default_str();
  ops_cmd->add_option("--active-side", ops.active_side, "side of the centered active box (geometric mode)")
      ->capture_default_str();
  ops_cmd->add_option("--activity", ops.activity, "explicit a_out per hidden layer")->delimiter(',');
  ops_cmd->add_flag("--json", ops.json, "print JSON");

  VoxelizeOptions vox;
  auto* vox_cmd = app.add_subcommand("voxelize", "convert an OFF mesh, SVID video or stroke file to a sparse grid");
  vox_cmd->add_option("input", vox.input, "input file; omit for a synthetic knot");
  vox_cmd->add_option("--kind", vox.kind, "auto, off, svid, strokes, unknot, trefoil, figure_eight")
      ->capture_default_str();
  vox_cmd->add_option("--lattice", vox.lattice, "lattice for synthetic knots")->capture_default_str();
  vox_cmd->add_option("--scale", vox.scale, "grid size")->capture_default_str();
  vox_cmd->add_option("--seed", vox.seed, "rotation seed (0 keeps meshes unrotated)")->capture_default_str();
  vox_cmd->add_option("--threshold-pct", vox.threshold_pct, "frame-difference threshold, percent of 255")
      ->capture_default_str();
  vox_cmd->add_option("--out", vox.out, "output grid file")->capture_default_str();

  DemoKnotOptions demo;
  auto* demo_cmd = app.add_subcommand("demo-knot", "draw a trefoil knot on a lattice");
  demo_cmd->add_option("--lattice", demo.lattice)->capture_default_str();
  demo_cmd->add_option("--scale", demo.scale, "grid size")->capture_default_str();
  demo_cmd->add_option("--seed", demo.seed)->capture_default_str();
  demo_cmd->add_option("--out", demo.out, "write the grid here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  return guarded(std::cerr, [&] {
    if (train_cmd->parsed()) return cmd_train(train, std::cout, std::cerr);
    if (eval_cmd->parsed()) return cmd_eval(eval, std::cout, std::cerr);
    if (ops_cmd->parsed()) return cmd_count_ops(ops, std::cout, std::cerr);
    if (vox_cmd->parsed()) return cmd_voxelize(vox, std::cout, std::cerr);
    return cmd_demo_knot(demo, std::cout, std::cerr);
  });
}
