#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace lmtest {

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. Work is
/// split into contiguous chunks; callers write results into per-index slots
/// and reduce afterwards in index order, which keeps results independent of
/// the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t max_threads = 0) {
  std::size_t threads = max_threads == 0 ? std::thread::hardware_concurrency()
                                         : max_threads;
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace lmtest
