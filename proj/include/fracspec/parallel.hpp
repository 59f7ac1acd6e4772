#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fracspec {

// Process-wide worker count used by grid sweeps (1 = run inline).
unsigned default_workers();
void set_default_workers(unsigned workers);

/// Calls fn(i) for i in [0, n) on `workers` threads using a fixed block
/// partition. Callers write into preassigned slots, so results do not depend
/// on the worker count. The first exception thrown by any block is rethrown.
template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  parallel_for(n, default_workers(), std::forward<F>(fn));
}

}  // namespace fracspec
