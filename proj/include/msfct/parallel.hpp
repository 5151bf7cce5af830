#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "msfct/core.hpp"

namespace msfct {

// Global worker cap. 0 means hardware concurrency. The cap never changes
// numerical results: parallel_for tasks own disjoint outputs and each task
// performs its accumulations in a fixed internal order.
inline std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{0};
  return cap;
}

inline void set_max_threads(int n) { thread_cap().store(n < 0 ? 0 : n); }

inline int effective_threads(Index n_tasks) {
  int cap = thread_cap().load();
  if (cap == 0) cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (static_cast<Index>(cap) > n_tasks) cap = static_cast<int>(n_tasks);
  return cap;
}

// Runs fn(i) for i in [0, n). fn(i) must write only to outputs owned by
// index i; under that contract the result is identical for any thread count.
template <class Fn>
void parallel_for(Index n, Fn&& fn) {
  if (n <= 0) return;
  const int workers = effective_threads(n);
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers) - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace msfct
