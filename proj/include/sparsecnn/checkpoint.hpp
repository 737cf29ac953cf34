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

#include <iosfwd>
#include <string>

#include "sparsecnn/network.hpp"

namespace sparsecnn {

// Layout (little-endian):
//   "SCNNCKPT" u32 version
//   u32 len, architecture string; u32 lattice; u32 n_input; i32 field; u32 classes
//   u32 record count, then per learnable or pooling layer:
//     u32 kind (0 conv, 1 max-pool, 2 fractional pool, 3 head), u32 lattice,
//     i32 size, i32 stride, i32 n_in, i32 n_out, f64 ratio,
//     u64 |W|, f32 W (row-major), u64 |B|, f32 B
void save_checkpoint(std::ostream& out, const Network<float>& net);
void save_checkpoint(const std::string& path, const Network<float>& net);

// Throws DataError on malformed input, ParseError if the stored architecture
// does not parse.
Network<float> load_checkpoint(std::istream& in);
Network<float> load_checkpoint(const std::string& path);

}  // namespace sparsecnn
