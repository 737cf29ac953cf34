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

#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sparsecnn/checkpoint.hpp"
#include "sparsecnn/errors.hpp"
#include "sparsecnn/ingest.hpp"
#include "sparsecnn/netspec.hpp"
#include "sparsecnn/parallel.hpp"

namespace sparsecnn::cli {

namespace {

LatticeKind lattice_arg(const std::string& name) {
  const auto kind = lattice_from_string(name);
  if (!kind) throw InvalidArgument("unknown lattice '" + name + "' (square, triangular, cubic, tetrahedral)");
  return *kind;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

enum class Split { train, test };

std::unique_ptr<Dataset> make_dataset(const DataOptions& d, Split split, LatticeKind lattice, double scale,
                                      bool augment) {
  const std::string& path = split == Split::train ? d.path : (d.test_path.empty() ? d.path : d.test_path);
  if (d.kind == "knots") {
    KnotDatasetConfig k;
    k.per_class = split == Split::train ? d.per_class : d.test_per_class;
    k.seed = derive_seed(d.seed, {split == Split::train ? 1u : 2u});
    k.lattice = lattice;
    k.scale = scale;
    k.augment_rotation = augment && d.random_rotation;
    return std::make_unique<KnotDataset>(k);
  }
  if (path.empty()) throw InvalidArgument("dataset '" + d.kind + "' needs --data");
  if (d.kind == "mesh") {
    return std::make_unique<MeshDataset>(MeshDatasetConfig{path, d.sample_scale, augment && d.random_rotation});
  }
  if (d.kind == "strokes") {
    return std::make_unique<StrokeDataset>(StrokeDatasetConfig{path, d.sample_scale, augment ? d.augment : AugmentRanges{}});
  }
  if (d.kind == "video") return std::make_unique<VideoDataset>(VideoDatasetConfig{path, d.threshold_pct});
  if (d.kind == "cifar") {
    return std::make_unique<CifarDataset>(CifarDatasetConfig{split_commas(path), augment ? d.augment : AugmentRanges{}, d.limit});
  }
  throw InvalidArgument("unknown dataset kind '" + d.kind + "' (knots, mesh, strokes, video, cifar)");
}

void apply_threads(int threads) {
  if (threads < 0) throw InvalidArgument("--threads must be non-negative");
  if (threads > 0) set_thread_count(threads);
}

}  // namespace

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  apply_threads(o.threads);
  const LatticeKind lattice = lattice_arg(o.lattice);
  if (o.arch.empty()) throw InvalidArgument("--arch is required");
  // Parse before touching data so a bad architecture fails fast.
  parse(o.arch, lattice, 1);
  const auto train_set = make_dataset(o.data, Split::train, lattice, o.scale, true);
  std::unique_ptr<Dataset> test_set;
  if (o.data.kind == "knots" || !o.data.test_path.empty()) {
    test_set = make_dataset(o.data, Split::test, lattice, o.scale, false);
  }
  const NetworkSpec spec = parse(o.arch, lattice, train_set->features());
  Network<float> net(plan(spec, o.scale, train_set->classes()), derive_seed(o.train.seed, {0x17}));
  // Samples that cannot be placed in the field fail here, even with --epochs 0.
  train_set->sample(0, 0, net.input_shape());
  if (test_set) test_set->sample(0, 0, net.input_shape());
  err << "field " << net.plan().field() << ", " << net.parameter_count() << " parameters, " << train_set->size()
      << " training samples\n";

  std::ofstream log_file;
  if (!o.log.empty()) {
    log_file.open(o.log);
    if (!log_file) throw DataError("cannot open log file " + o.log);
  }
  auto emit = [&](const std::string& line) {
    out << line << "\n" << std::flush;
    if (log_file) log_file << line << "\n" << std::flush;
  };
  emit(EpochLog::header());
  train(net, *train_set, test_set.get(), o.train, [&](const EpochLog& log) { emit(log.line()); });
  save_checkpoint(o.out, net);
  err << "wrote " << o.out << "\n";
  return kOk;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  apply_threads(o.threads);
  if (o.checkpoint.empty()) throw InvalidArgument("--checkpoint is required");
  const Network<float> net = load_checkpoint(o.checkpoint);
  const NetworkSpec& spec = net.plan().spec;
  if (!o.arch.empty()) {
    const std::string want = render(parse(o.arch, spec.lattice, spec.n_input));
    if (want != render(spec)) {
      err << "error: checkpoint architecture " << render(spec) << " does not match --arch " << want << "\n";
      return kConfigError;
    }
  }
  const auto data = make_dataset(o.data, Split::test, spec.lattice, o.scale, true);
  data->sample(0, 0, net.input_shape());
  EvalConfig config;
  config.repeats = o.repeats;
  config.seed = o.seed;
  const EvalReport report = evaluate(net, *data, config);
  out << (o.json ? format_eval_json(report) + "\n" : format_eval_report(report));
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw DataError("cannot open " + o.out);
    f << format_eval_json(report) << "\n";
  }
  return kOk;
}

int cmd_count_ops(const CountOpsOptions& o, std::ostream& out, std::ostream&) {
  const LatticeKind lattice = lattice_arg(o.lattice);
  if (o.arch.empty()) throw InvalidArgument("--arch is required");
  const NetworkPlan p = plan(parse(o.arch, lattice, o.n_input), o.scale, o.classes);
  OpCount ops;
  if (!o.activity.empty()) {
    ops = count_ops(p, o.activity);
  } else if (o.mode == "dense") {
    ops = count_ops_dense(p);
  } else if (o.mode == "geometric") {
    ops = count_ops_geometric(p, centered_box(p.input_shape(), o.active_side));
  } else {
    throw InvalidArgument("unknown --mode '" + o.mode + "' (dense, geometric)");
  }
  out << (o.json ? format_report_json(p, ops) + "\n" : format_report(p, ops));
  return kOk;
}

namespace {

std::string detect_kind(const VoxelizeOptions& o) {
  if (o.kind != "auto") return o.kind;
  if (o.input.empty()) return "trefoil";
  const std::string ext = std::filesystem::path(o.input).extension().string();
  if (ext == ".off") return "off";
  if (ext == ".svid") return "svid";
  if (ext == ".json") return "strokes";
  throw DataError("cannot detect the format of " + o.input + " (expected .off, .svid or .json)");
}

std::optional<KnotKind> knot_kind(const std::string& name) {
  if (name == "unknot") return KnotKind::unknot;
  if (name == "trefoil") return KnotKind::trefoil;
  if (name == "figure_eight" || name == "figure-eight") return KnotKind::figure_eight;
  return std::nullopt;
}

void print_grid_summary(std::ostream& out, const SparseGrid<float>& grid) {
  const auto sites = site_count(grid.shape().lattice, grid.shape().m);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "lattice\t%s\nsize\t%d\nactive\t%lld\nsites\t%lld\nfraction\t%.6f\n",
                std::string(to_string(grid.shape().lattice)).c_str(), grid.shape().m,
                static_cast<long long>(grid.active_count()), static_cast<long long>(sites),
                static_cast<double>(grid.active_count()) / static_cast<double>(sites));
  out << buf;
}

void write_grid_file(const std::string& path, const SparseGrid<float>& grid) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  write_grid(f, grid);
  if (!f) throw DataError("failed writing " + path);
}

}  // namespace

int cmd_voxelize(const VoxelizeOptions& o, std::ostream& out, std::ostream& err) {
  const std::string kind = detect_kind(o);
  Rng rng(o.seed);
  SparseGrid<float> grid;
  if (kind == "off") {
    const Mat3 rotation = o.seed ? random_rotation(rng) : identity3();
    grid = voxelize_mesh(load_off_file(o.input), o.scale, rotation);
  } else if (kind == "svid") {
    grid = frame_difference(read_svid_file(o.input), o.threshold_pct);
  } else if (kind == "strokes") {
    grid = strokes_to_spacetime(load_strokes_file(o.input), o.scale);
  } else if (auto k = knot_kind(kind)) {
    grid = synth_knot(*k, o.scale, rng, lattice_arg(o.lattice)).grid;
  } else {
    throw InvalidArgument("unknown --kind '" + kind + "'");
  }
  if (grid.active_count() == 0) err << "warning: grid has no active sites\n";
  write_grid_file(o.out, grid);
  print_grid_summary(out, grid);
  return kOk;
}

int cmd_demo_knot(const DemoKnotOptions& o, std::ostream& out, std::ostream&) {
  const LatticeKind lattice = lattice_arg(o.lattice);
  Rng rng(o.seed);
  const SparseGrid<float> grid = synth_knot(KnotKind::trefoil, o.scale, rng, lattice).grid;
  print_grid_summary(out, grid);
  out << "components\t" << connected_components(grid.index()) << "\n";
  // Projection along the third axis.
  const std::int32_t m = grid.shape().m;
  std::vector<std::string> rows(static_cast<std::size_t>(m), std::string(static_cast<std::size_t>(m), '.'));
  for (std::int64_t r = 0; r < grid.active_count(); ++r) {
    const Site s = grid.index().site(r);
    rows[static_cast<std::size_t>(s[1])][static_cast<std::size_t>(s[0])] = '#';
  }
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) out << *it << "\n";
  if (!o.out.empty()) write_grid_file(o.out, grid);
  return kOk;
}

}  // namespace sparsecnn::cli
