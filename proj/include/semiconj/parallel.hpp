#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace semiconj {

/// Worker count: hardware concurrency, capped by the SEMICONJ_THREADS
/// environment variable when set. Always at least 1.
inline int thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  int n = hw ? static_cast<int>(hw) : 1;
  if (const char* env = std::getenv("SEMICONJ_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

/// Static partition of [0, count) across worker threads. fn(i) must be safe
/// to call concurrently for distinct i and its result must not depend on the
/// partitioning. The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(std::int64_t count, Fn&& fn) {
  const int nt = std::min<std::int64_t>(thread_count(), std::max<std::int64_t>(count, 1));
  if (count <= 0) return;
  if (nt <= 1 || count < 512) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(nt);
  const std::int64_t chunk = (count + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace semiconj
