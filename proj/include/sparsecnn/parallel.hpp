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

namespace sparsecnn {

// Worker count used by parallel_for. Defaults to hardware concurrency.
int thread_count();
void set_thread_count(int threads);

// Calls fn(begin, end) on contiguous chunks covering [0, n). Chunks run on a
// shared worker pool; the call returns when all have finished. Exceptions
// thrown by fn are rethrown on the calling thread (the first one wins).
// Results must not depend on the chunking: callers only write disjoint
// outputs per index.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn,
                  std::int64_t min_chunk = 1);

}  // namespace sparsecnn
