#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace dpgcl {

// Thread cap from DPGCL_THREADS; 0 or unset means hardware concurrency.
inline unsigned thread_budget() {
  static const unsigned budget = [] {
    unsigned n = 0;
    if (const char* env = std::getenv("DPGCL_THREADS")) {
      n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
  }();
  return budget;
}

// Runs fn(i) for i in [0, n). Work items must be independent; callers that
// aggregate results do so afterwards in index order, so the outcome is
// identical at any parallelism degree.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::min<std::size_t>(thread_budget(), n);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace dpgcl
