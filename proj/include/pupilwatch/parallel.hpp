#ifndef PUPILWATCH_PARALLEL_HPP
#define PUPILWATCH_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace pupilwatch {

/// Worker cap: PUPILWATCH_THREADS when set, hardware concurrency otherwise.
inline unsigned worker_count() {
  if (const char* env = std::getenv("PUPILWATCH_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Runs fn(slot) for slot in [0, n_slots). Work partitioning is by slot, so
/// results that are accumulated per slot and reduced in slot order do not
/// depend on the number of threads.
inline void parallel_slots(unsigned n_slots, const std::function<void(unsigned)>& fn) {
  const unsigned workers = std::min(worker_count(), n_slots);
  if (workers <= 1) {
    for (unsigned s = 0; s < n_slots; ++s) fn(s);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (unsigned s = w; s < n_slots; s += workers) fn(s);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace pupilwatch

#endif
