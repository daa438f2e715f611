// Minimal slot-based parallelism helpers.
//
// Every parallel loop in this project writes results into preallocated
// per-index slots and reduces them afterwards with a fixed-shape pairwise
// tree, so results are bitwise independent of the number of worker threads.

#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace zvar {

// Worker count: ZVAR_THREADS if set (clamped to >= 1), else the hardware count.
inline int worker_count() {
  if (const char* env = std::getenv("ZVAR_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Run fn(i) for i in [0, n), distributing indices over worker threads.
// fn must only touch state owned by index i (slot discipline).
inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  int workers = worker_count();
  if (workers <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto drain = [&] {
    for (;;) {
      std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(drain);
  drain();
  for (auto& th : pool) th.join();
}

}  // namespace zvar
