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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparsecnn {

// Bad caller input: wrong sizes, out-of-range values, mismatched shapes.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A layer's input size is incompatible with its filter size and stride.
class SizeMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A network cannot be sized for the requested input.
class PlanError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Malformed text input. `position()` is a byte offset for architecture
// strings and a 1-based line number for line-oriented file formats.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Unreadable or inconsistent data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace sparsecnn
