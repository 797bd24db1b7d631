#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace branchdepth {

// Runs fn(i) for i in [0, n).  Each call must write only to its own slot so
// the result is independent of scheduling; the iteration order is then an
// implementation detail and outputs stay bit-reproducible at any thread
// count.  The first exception is rethrown on the caller thread.
inline void parallel_for_index(std::size_t n, int num_threads,
                               const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = num_threads < 1 ? 1 : static_cast<std::size_t>(num_threads);
  if (workers > n) workers = n;
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 0; t + 1 < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace branchdepth
