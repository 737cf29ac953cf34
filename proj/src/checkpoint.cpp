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

#include "sparsecnn/checkpoint.hpp"

#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "sparsecnn/errors.hpp"

namespace sparsecnn {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

enum RecordKind : std::uint32_t { kConv = 0, kMaxPool = 1, kFmp = 2, kHead = 3 };

struct Record {
  std::uint32_t kind = 0;
  std::uint32_t lattice = 0;
  std::int32_t size = 0;
  std::int32_t stride = 0;
  std::int32_t n_in = 0;
  std::int32_t n_out = 0;
  double ratio = 0;
};

void write_record(std::ostream& out, const Record& r) {
  detail::write_le(out, r.kind);
  detail::write_le(out, r.lattice);
  detail::write_le(out, r.size);
  detail::write_le(out, r.stride);
  detail::write_le(out, r.n_in);
  detail::write_le(out, r.n_out);
  detail::write_le(out, r.ratio);
}

Record read_record(std::istream& in) {
  Record r;
  r.kind = detail::read_le<std::uint32_t>(in, "layer kind");
  r.lattice = detail::read_le<std::uint32_t>(in, "layer lattice");
  r.size = detail::read_le<std::int32_t>(in, "layer size");
  r.stride = detail::read_le<std::int32_t>(in, "layer stride");
  r.n_in = detail::read_le<std::int32_t>(in, "layer n_in");
  r.n_out = detail::read_le<std::int32_t>(in, "layer n_out");
  r.ratio = detail::read_le<double>(in, "layer ratio");
  return r;
}

void write_floats(std::ostream& out, const std::vector<float>& v) {
  detail::write_le<std::uint64_t>(out, v.size());
  for (float x : v) detail::write_le(out, x);
}

void read_floats(std::istream& in, std::vector<float>& v, const char* what) {
  const auto count = detail::read_le<std::uint64_t>(in, what);
  if (count != v.size()) {
    throw DataError(std::string("checkpoint ") + what + " has " + std::to_string(count) + " values, expected " +
                    std::to_string(v.size()));
  }
  for (auto& x : v) x = detail::read_le<float>(in, what);
}

Record conv_record(const ConvLayer<float>& layer, std::uint32_t kind) {
  return Record{kind, static_cast<std::uint32_t>(layer.geometry.lattice()), layer.geometry.size(),
                layer.geometry.stride(), layer.n_in, layer.n_out, 0.0};
}

void expect(bool ok, const std::string& message) {
  if (!ok) throw DataError("checkpoint does not match its architecture: " + message);
}

void expect_same(const Record& got, const Record& want, std::size_t index) {
  expect(got.kind == want.kind && got.lattice == want.lattice && got.size == want.size &&
             got.stride == want.stride && got.n_in == want.n_in && got.n_out == want.n_out && got.ratio == want.ratio,
         "layer record " + std::to_string(index));
}

}  // namespace

void save_checkpoint(std::ostream& out, const Network<float>& net) {
  const NetworkPlan& plan = net.plan();
  out.write(kMagic, sizeof(kMagic));
  detail::write_le(out, kVersion);
  const std::string arch = render(plan.spec);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(arch.size()));
  out.write(arch.data(), static_cast<std::streamsize>(arch.size()));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(plan.spec.lattice));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(plan.spec.n_input));
  detail::write_le<std::int32_t>(out, plan.field());
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(plan.n_classes));

  const auto& stages = net.stages();
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(stages.size() + 1));
  for (const auto& s : stages) {
    switch (s.kind) {
      case Stage<float>::Kind::conv:
        write_record(out, conv_record(s.conv, kConv));
        write_floats(out, s.conv.weights.values);
        write_floats(out, s.conv.bias.values);
        break;
      case Stage<float>::Kind::max_pool:
        write_record(out, Record{kMaxPool, static_cast<std::uint32_t>(s.pool.lattice), s.pool.p, s.pool.s, 0, 0, 0.0});
        write_floats(out, {});
        write_floats(out, {});
        break;
      case Stage<float>::Kind::fmp:
        write_record(out, Record{kFmp, static_cast<std::uint32_t>(s.fmp.lattice), 2, 0, 0, 0, s.fmp.ratio});
        write_floats(out, {});
        write_floats(out, {});
        break;
    }
  }
  write_record(out, conv_record(net.head(), kHead));
  write_floats(out, net.head().weights.values);
  write_floats(out, net.head().bias.values);
  if (!out) throw DataError("failed writing checkpoint");
}

void save_checkpoint(const std::string& path, const Network<float>& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  save_checkpoint(out, net);
}

Network<float> load_checkpoint(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kMagic)) {
    throw DataError("not a checkpoint file");
  }
  const auto version = detail::read_le<std::uint32_t>(in, "version");
  if (version != kVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  const auto len = detail::read_le<std::uint32_t>(in, "architecture length");
  if (len > (1u << 20)) throw DataError("architecture string too long");
  std::string arch(len, '\0');
  if (!in.read(arch.data(), len)) throw DataError("truncated record while reading architecture");
  const auto lattice = detail::read_le<std::uint32_t>(in, "lattice");
  if (lattice > 3) throw DataError("unknown lattice code " + std::to_string(lattice));
  const auto n_input = detail::read_le<std::uint32_t>(in, "input features");
  const auto field = detail::read_le<std::int32_t>(in, "field");
  const auto classes = detail::read_le<std::uint32_t>(in, "classes");

  const NetworkSpec spec = parse(arch, static_cast<LatticeKind>(lattice), static_cast<int>(n_input));
  NetworkPlan planned = plan(spec, field, static_cast<int>(classes));
  expect(planned.field() == field, "planned field " + std::to_string(planned.field()));
  Network<float> net(std::move(planned), 0);

  auto& stages = net.stages();
  const auto count = detail::read_le<std::uint32_t>(in, "record count");
  expect(count == stages.size() + 1, "record count");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    auto& s = stages[i];
    const Record got = read_record(in);
    std::vector<float> none;
    switch (s.kind) {
      case Stage<float>::Kind::conv:
        expect_same(got, conv_record(s.conv, kConv), i);
        read_floats(in, s.conv.weights.values, "weights");
        read_floats(in, s.conv.bias.values, "bias");
        break;
      case Stage<float>::Kind::max_pool:
        expect_same(got, Record{kMaxPool, static_cast<std::uint32_t>(s.pool.lattice), s.pool.p, s.pool.s, 0, 0, 0.0},
                    i);
        read_floats(in, none, "weights");
        read_floats(in, none, "bias");
        break;
      case Stage<float>::Kind::fmp:
        expect_same(got, Record{kFmp, static_cast<std::uint32_t>(s.fmp.lattice), 2, 0, 0, 0, s.fmp.ratio}, i);
        read_floats(in, none, "weights");
        read_floats(in, none, "bias");
        break;
    }
  }
  expect_same(read_record(in), conv_record(net.head(), kHead), stages.size());
  read_floats(in, net.head().weights.values, "head weights");
  read_floats(in, net.head().bias.values, "head bias");
  return net;
}

Network<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  return load_checkpoint(in);
}

}  // namespace sparsecnn
