#pragma once

#include <cstddef>
#include <functional>

namespace pufmc {

/// Worker count used when an option asks for 0 threads. Defaults to the
/// hardware concurrency.
unsigned default_thread_count() noexcept;
void set_default_thread_count(unsigned threads) noexcept;

/// Runs fn(0) .. fn(jobs - 1) on up to `threads` workers (0 = default). Jobs
/// are claimed dynamically, so fn must not depend on which worker runs it.
/// The first exception thrown by a job is rethrown after all workers stop.
void parallel_for(std::size_t jobs, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace pufmc
