#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace prmh {

// Runs body(0..n-1) on up to `parallelism` threads. Exceptions are collected
// per index and the lowest-index one is rethrown after all workers join, so
// the surfaced error does not depend on thread interleaving.
inline void parallel_for(std::size_t n, int parallelism,
                         const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  if (parallelism <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::size_t workers = static_cast<std::size_t>(parallelism);
  if (workers > n) workers = n;
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(run);
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace prmh
