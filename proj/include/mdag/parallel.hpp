#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace mdag {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Callers keep
/// determinism by writing into index-addressed slots.
template <typename F>
void parallel_for(std::size_t count, unsigned jobs, F&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  unsigned k = std::min<std::size_t>(jobs, count);
  pool.reserve(k);
  for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace mdag
