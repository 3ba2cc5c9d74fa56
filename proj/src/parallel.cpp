#include "hitr/parallel.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace hitr {

namespace {

unsigned g_max_jobs = 1;

}  // namespace

void set_max_jobs(unsigned jobs) {
  if (jobs == 0) {
    unsigned hw = std::thread::hardware_concurrency();
    g_max_jobs = hw == 0 ? 1 : hw;
  } else {
    g_max_jobs = jobs;
  }
}

unsigned max_jobs() { return g_max_jobs; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = std::min<std::size_t>(g_max_jobs, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  // All indices run to completion even after a failure; the exception from
  // the lowest failing index is rethrown, so the caller sees the same error
  // regardless of scheduling.
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();

  auto body = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(body);
  body();
  for (auto& t : threads) t.join();

  if (error) std::rethrow_exception(error);
}

}  // namespace hitr
