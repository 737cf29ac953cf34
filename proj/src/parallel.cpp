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

#include "sparsecnn/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "sparsecnn/errors.hpp"

namespace sparsecnn {

namespace {

thread_local bool tl_inside_pool = false;

class WorkerPool {
 public:
  ~WorkerPool() { resize(0); }

  int size() const { return static_cast<int>(workers_.size()); }

  void resize(int workers) {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : workers_) t.join();
    workers_.clear();
    stop_ = false;
    for (int i = 0; i < workers; ++i) workers_.emplace_back([this] { loop(); });
  }

  // Runs task(i) for i in [0, tasks); the caller executes tasks too.
  void run(int tasks, const std::function<void(int)>& task) {
    std::unique_lock lock(mutex_);
    task_ = &task;
    tasks_ = tasks;
    next_ = 0;
    pending_ = tasks;
    error_ = nullptr;
    ++generation_;
    lock.unlock();
    wake_.notify_all();
    work();
    lock.lock();
    done_.wait(lock, [this] { return pending_ == 0; });
    task_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void loop() {
    tl_inside_pool = true;
    std::uint64_t seen = 0;
    while (true) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      work();
    }
  }

  void work() {
    while (true) {
      int i;
      const std::function<void(int)>* task;
      {
        std::lock_guard lock(mutex_);
        if (!task_ || next_ >= tasks_) return;
        i = next_++;
        task = task_;
      }
      std::exception_ptr err;
      try {
        (*task)(i);
      } catch (...) {
        err = std::current_exception();
      }
      std::lock_guard lock(mutex_);
      if (err && !error_) error_ = err;
      if (--pending_ == 0) done_.notify_all();
    }
  }

  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  std::vector<std::thread> workers_;
  const std::function<void(int)>* task_ = nullptr;
  int tasks_ = 0;
  int next_ = 0;
  int pending_ = 0;
  std::uint64_t generation_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

std::mutex g_config_mutex;
std::atomic<int> g_threads{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};

WorkerPool& pool() {
  static WorkerPool instance;
  return instance;
}

}  // namespace

int thread_count() { return g_threads.load(); }

void set_thread_count(int threads) {
  if (threads < 1) throw InvalidArgument("thread count must be >= 1");
  g_threads.store(threads);
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn, std::int64_t min_chunk) {
  if (n <= 0) return;
  const int threads = thread_count();
  const std::int64_t max_chunks = std::max<std::int64_t>(1, n / std::max<std::int64_t>(1, min_chunk));
  const int chunks = static_cast<int>(std::min<std::int64_t>(threads, max_chunks));
  if (chunks <= 1 || tl_inside_pool) {
    fn(0, n);
    return;
  }
  std::lock_guard config(g_config_mutex);
  WorkerPool& p = pool();
  if (p.size() != threads - 1) p.resize(threads - 1);
  p.run(chunks, [&](int c) {
    const std::int64_t begin = n * c / chunks;
    const std::int64_t end = n * (c + 1) / chunks;
    const bool was_inside = tl_inside_pool;
    tl_inside_pool = true;
    try {
      if (begin < end) fn(begin, end);
    } catch (...) {
      tl_inside_pool = was_inside;
      throw;
    }
    tl_inside_pool = was_inside;
  });
}

}  // namespace sparsecnn
