#include "pufmc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pufmc {

namespace {
std::atomic<unsigned> g_default_threads{0};
}

unsigned default_thread_count() noexcept {
  const unsigned t = g_default_threads.load();
  if (t != 0) return t;
  return std::max(1U, std::thread::hardware_concurrency());
}

void set_default_thread_count(unsigned threads) noexcept { g_default_threads.store(threads); }

void parallel_for(std::size_t jobs, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) return;
  if (threads == 0) threads = default_thread_count();
  const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) fn(j);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed.load()) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      try {
        fn(j);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace pufmc
