#pragma once

// Deterministic data parallelism: work items write to disjoint slots and any
// reduction happens afterwards in index order, so results do not depend on
// the configured thread count.

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace reside {

namespace parallel_detail {
inline std::atomic<unsigned>& thread_count_slot() {
  static std::atomic<unsigned> count{0};  // 0 = hardware default
  return count;
}
}  // namespace parallel_detail

inline void set_thread_count(unsigned n) { parallel_detail::thread_count_slot().store(n); }

inline unsigned thread_count() {
  unsigned n = parallel_detail::thread_count_slot().load();
  if (n == 0) {
    n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
  }
  return n;
}

// fn(index, worker): `worker` is a stable id < thread_count(), usable to
// pick per-worker scratch space.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned workers = thread_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0u);
    return;
  }
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (unsigned w = 0; w < used; ++w) {
    pool.emplace_back([=, &fn]() {
      // contiguous chunks; chunk boundaries depend only on n and `used`
      const std::size_t lo = n * w / used;
      const std::size_t hi = n * (w + 1) / used;
      for (std::size_t i = lo; i < hi; ++i) fn(i, w);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace reside
