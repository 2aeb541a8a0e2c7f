#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace txa {

/// Runs fn(i) for i in [0, n) across up to `workers` threads in contiguous
/// blocks. Callers write results into preallocated per-index slots, so the
/// outcome is identical for any worker count (including 1, which runs
/// inline). Exceptions propagate from the first failing block.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  const std::size_t chunk = (n + n_threads - 1) / n_threads;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace txa
