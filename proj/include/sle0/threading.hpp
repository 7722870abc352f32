#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace sle0 {

/// Worker cap: SLE0_THREADS env var, else hardware concurrency.
inline unsigned max_threads() {
  if (const char* env = std::getenv("SLE0_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Index-parallel loop. Results must be written by index so the output is
/// identical for every thread count.
template <typename F>
void parallel_for(std::size_t count, F&& body) {
  const unsigned workers = std::min<std::size_t>(max_threads(), count);
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sle0
