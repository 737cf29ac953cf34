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

// Published architectures, with elided middle layers written out.
#pragma once

#include <string>
#include <vector>

#include "sparsecnn/lattice.hpp"

namespace sparsecnn::testing_archs {

struct NamedArch {
  std::string name;
  std::string text;
  LatticeKind lattice;
  int n_input;
  int scale;  // input scale for fractional pooling networks, else 0
};

// Notation example: tetrahedral conv + overlapping pool.
inline const std::string kNotationExample = "32C2-MP3/2-output";

// CIFAR-10 square/triangular comparison: 12 convolutions in pairs of 32n
// features, 5 pooling layers.
inline const std::string kPairedCifarNet =
    "32C2-32C2-MP3/2-64C2-64C2-MP3/2-96C2-96C2-MP3/2-128C2-128C2-MP3/2-160C2-160C2-MP3/2-192C2-192C2-output";

// 3D shape networks: conv blocks of 32n features separated by pooling.
inline const std::string kShapeNet4 = "32C2-MP3/2-64C2-MP3/2-96C2-MP3/2-128C2-MP3/2-160C2-output";
inline const std::string kShapeNet5 = "32C2-MP3/2-64C2-MP3/2-96C2-MP3/2-128C2-MP3/2-160C2-MP3/2-192C2-output";
inline const std::string kShapeNet6 =
    "32C2-MP3/2-64C2-MP3/2-96C2-MP3/2-128C2-MP3/2-160C2-MP3/2-192C2-MP3/2-224C2-output";
inline const std::string kShapeNetFmp6 =
    "32C2-FMP-64C2-FMP-96C2-FMP-128C2-FMP-160C2-FMP-192C2-FMP-224C2-output";
inline const std::string kShapeNetFmp7 =
    "32C2-FMP-64C2-FMP-96C2-FMP-128C2-FMP-160C2-FMP-192C2-FMP-224C2-FMP-256C2-output";

// Space-time handwriting network.
inline const std::string kHandwritingNet = "32C3-MP3/2-64C2-MP3/2-128C2-MP3/2-256C2-MP3/2-512C3-output";

// Frame-difference action recognition network.
inline const std::string kActionNet =
    "32C2-MP3/2-64C2-MP3/2-96C2-MP3/2-128C2-MP3/2-160C2-MP3/2-192C2-MP3/2-224C2-output";

// Three-pool network named for the knot toy task.
inline const std::string kKnotNet = "32C2-MP3/2-64C2-MP3/2-96C2-output";

inline std::vector<NamedArch> published_architectures() {
  return {
      {"notation-tetrahedral", kNotationExample, LatticeKind::tetrahedral, 1, 0},
      {"cifar-square", kPairedCifarNet, LatticeKind::square, 3, 0},
      {"cifar-triangular", kPairedCifarNet, LatticeKind::triangular, 3, 0},
      {"shape-4pool-tetrahedral", kShapeNet4, LatticeKind::tetrahedral, 1, 0},
      {"shape-5pool-tetrahedral", kShapeNet5, LatticeKind::tetrahedral, 1, 0},
      {"shape-6pool-tetrahedral", kShapeNet6, LatticeKind::tetrahedral, 1, 0},
      {"shape-4pool-cubic", kShapeNet4, LatticeKind::cubic, 1, 0},
      {"shape-5pool-cubic", kShapeNet5, LatticeKind::cubic, 1, 0},
      {"shape-6pool-cubic", kShapeNet6, LatticeKind::cubic, 1, 0},
      {"shape-6fmp-cubic", kShapeNetFmp6, LatticeKind::cubic, 1, 20},
      {"shape-7fmp-cubic", kShapeNetFmp7, LatticeKind::cubic, 1, 32},
      {"handwriting-cubic", kHandwritingNet, LatticeKind::cubic, 1, 0},
      {"action-cubic", kActionNet, LatticeKind::cubic, 1, 0},
  };
}

}  // namespace sparsecnn::testing_archs
