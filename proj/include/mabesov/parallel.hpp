#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

#include "mabesov/types.hpp"

namespace mabesov {

// Thread cap: MABESOV_THREADS if set, else hardware concurrency (capped at 8).
inline int thread_count() {
  if (const char* env = std::getenv("MABESOV_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

// Deterministic parallel loop over [0, n): the body writes to disjoint
// per-index state only, so the schedule cannot affect results.
inline void parallel_for(Index n, const std::function<void(Index)>& body) {
  const int threads = std::min<Index>(thread_count(), n) > 0 ? static_cast<int>(std::min<Index>(thread_count(), n)) : 1;
  if (threads <= 1 || n < 64) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const Index chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const Index b = t * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      for (Index i = b; i < e; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mabesov
