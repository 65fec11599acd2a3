#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fracslow {

namespace detail {
inline std::atomic<std::size_t>& default_worker_count() {
  static std::atomic<std::size_t> n{0};
  return n;
}
}  // namespace detail

/// Worker count used when callers pass 0. 0 means hardware concurrency.
inline void set_default_workers(std::size_t n) { detail::default_worker_count() = n; }

inline std::size_t resolve_workers(std::size_t requested) {
  if (requested == 0) requested = detail::default_worker_count();
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

/// Runs body(i) for i in [0, n). Jobs are independent; results must be
/// written to per-index slots so the outcome does not depend on scheduling.
/// The first exception thrown by any job is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t workers = 0) {
  workers = std::min(resolve_workers(workers), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fracslow
