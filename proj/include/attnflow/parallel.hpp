#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace attnflow {

// Worker count from ATTNFLOW_WORKERS, else hardware concurrency (at least 1).
unsigned default_workers();

// Runs fn(i) for i in [0, n) over contiguous chunks, one chunk per worker.
// Each index is visited by exactly one worker, so per-index writes are race-free.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace attnflow
