#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace ksr {

inline unsigned default_thread_count() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Runs fn(begin, end) over a static partition of [0, n). Workers own
/// disjoint index ranges, so results written to per-index slots are
/// identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    fn(static_cast<std::size_t>(0), n);
    return;
  }
  if (threads > n) threads = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t base = n / threads;
  const std::size_t rem = n % threads;
  std::size_t begin = 0;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t len = base + (w < rem ? 1 : 0);
    const std::size_t end = begin + len;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace ksr
