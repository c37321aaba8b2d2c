#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace mdr {

inline unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Jacobi-style data parallelism: body(begin, end) is invoked on disjoint
/// contiguous index ranges. Results must not depend on the partition.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const unsigned k = resolve_threads(threads);
  if (k <= 1 || n < 4096) {
    body(std::size_t(0), n);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(k, n));
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(0, std::min(n, chunk));
  for (auto& th : pool) th.join();
}

}  // namespace mdr
