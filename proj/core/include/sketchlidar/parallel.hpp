#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace sketchlidar {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Splits [begin, end) into contiguous chunks, one worker thread per chunk.
// The callable must not throw.
template <typename Fn>
void parallel_for(int64_t begin, int64_t end, int threads, Fn&& fn) {
  const int64_t n = end - begin;
  if (n <= 0) return;
  const int workers = static_cast<int>(std::min<int64_t>(resolve_threads(threads), n));
  if (workers <= 1) {
    fn(begin, end);
    return;
  }
  const int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int64_t lo = begin + w * chunk;
    const int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace sketchlidar
