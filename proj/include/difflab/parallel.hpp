#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace difflab {

/// Worker count from DIFFLAB_THREADS, else the hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is
/// processed exactly once, so results written per index are deterministic.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] {
      for (std::size_t i = b; i < e; ++i) body(i);
    });
  }
}

}  // namespace difflab
