//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Minimal index-sharded worker pool for per-item batch work. Callers write
// results into per-index slots so the outcome never depends on scheduling.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace aigen {

/// Worker count for parallel sections: the AIGEN_WORKERS environment variable
/// when set to a positive integer, otherwise the hardware thread count.
inline uint32_t default_workers() {
  if (const char* env = std::getenv("AIGEN_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return uint32_t(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Runs fn(i) for every i in [0, n) on up to n_workers threads. The first
/// exception raised by any call is rethrown once all workers have stopped;
/// remaining indices are abandoned at that point.
inline void parallel_for(size_t n, uint32_t n_workers, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  const uint32_t workers = uint32_t(std::min<uint64_t>(std::max(1u, n_workers), n));
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> bail{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  const auto body = [&] {
    while (!bail.load(std::memory_order_relaxed)) {
      const size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        bail.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (uint32_t w = 0; w + 1 < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace aigen
