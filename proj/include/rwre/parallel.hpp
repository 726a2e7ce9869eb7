#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rwre {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(job) for job = 0..jobs-1 on a small worker pool.  Jobs are claimed
// dynamically, so fn must write its output into a preassigned slot; callers
// then reduce those slots sequentially in job order, which is what makes
// every aggregate bit-identical no matter how many workers ran.
template <typename F>
inline void parallel_for(std::int64_t jobs, int workers, F&& fn) {
  workers = resolve_workers(workers);
  if (jobs <= 0) return;
  if (workers <= 1 || jobs == 1) {
    for (std::int64_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  if (static_cast<std::int64_t>(workers) > jobs) workers = static_cast<int>(jobs);
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= jobs || failed.load(std::memory_order_relaxed)) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rwre
