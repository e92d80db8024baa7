#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace densedepth {

inline unsigned resolve_workers(int workers) {
  if (workers > 0) return static_cast<unsigned>(workers);
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(begin, end) over [0, n) split into contiguous blocks, one block
/// stream per worker. Blocks are fixed by n and the worker count only, so
/// any per-element output written into preallocated storage is identical
/// for every worker count.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  unsigned nw = std::min<std::size_t>(resolve_workers(workers), n);
  if (nw <= 1) {
    fn(0, n);
    return;
  }
  // a few blocks per worker, capped so big inputs still interleave
  const std::size_t block = std::clamp<std::size_t>(n / (nw * 4), 1, 1024);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      std::size_t b = next.fetch_add(block);
      if (b >= n) break;
      fn(b, std::min(n, b + block));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nw - 1);
  for (unsigned i = 0; i + 1 < nw; ++i) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

}  // namespace densedepth
