#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

// Seed-level parallelism for benchmark sweeps: fn(i) runs for every i in
// [0, n), indices handed out atomically to up to `workers` threads. Callers
// write results into per-index slots, so aggregation is order-independent
// no matter how the indices interleave. The first exception stops the pool
// and is rethrown after all threads drain.

namespace depround {

inline int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto drain = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace depround
