#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace motionalign::detail {

inline thread_local bool in_parallel_region = false;

// Splits [0, n) into contiguous chunks, one per worker. Each index is handled
// by exactly one call of fn, so results that depend only on the index are
// identical for any worker count. Nested calls run serially.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned max_workers = 0) {
  unsigned workers = max_workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : max_workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1 || in_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      in_parallel_region = true;
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace motionalign::detail
