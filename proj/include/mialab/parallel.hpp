//
// Copyright 2026 The mialab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mialab {

// Thread-count resolution: values <= 0 mean "auto" (hardware concurrency).
inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(0), ..., fn(n_tasks-1), possibly concurrently. Tasks must write to
// disjoint state so results do not depend on the schedule; any exception is
// rethrown on the calling thread after all workers finish.
inline void parallel_for(std::uint64_t n_tasks, int threads,
                         const std::function<void(std::uint64_t)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n_tasks <= 1) {
    for (std::uint64_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  const std::uint64_t n_workers =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), n_tasks);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::uint64_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mialab
