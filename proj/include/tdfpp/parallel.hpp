// Copyright 2026 the tdfpp authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TDFPP_PARALLEL_HPP
#define TDFPP_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "tdfpp/common.hpp"

namespace tdfpp {

inline int default_worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for every i in [0, count) across `workers` threads.
///
/// Work is handed out through a shared atomic counter, so the assignment of
/// indices to threads is racy — callers must write results into
/// per-index slots (or otherwise reduce order-independently) for output to
/// be identical across worker counts. The first exception thrown by any
/// invocation is rethrown on the calling thread once all workers stop.
template <typename Fn>
void for_each_index(std::uint64_t count, int workers, Fn&& fn) {
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  if (count == 0) return;

  if (workers == 1 || count == 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto drain = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
        abort.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const auto n_threads =
      static_cast<std::uint64_t>(workers) < count
          ? static_cast<std::uint64_t>(workers)
          : count;
  pool.reserve(n_threads);
  for (std::uint64_t w = 0; w < n_threads; ++w) pool.emplace_back(drain);
  for (auto& th : pool) th.join();

  if (error) std::rethrow_exception(error);
}

}  // namespace tdfpp

#endif  // TDFPP_PARALLEL_HPP
