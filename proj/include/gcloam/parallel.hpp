#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace gcloam {

/// Runs fn(0..n-1) on up to `threads` workers. Callers write results into
/// pre-assigned slots, so the output never depends on the thread count.
inline void parallelFor(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::min(std::max(threads, 1), n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace gcloam
