#pragma once

#include <cstddef>
#include <functional>

namespace teamcomm {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index runs exactly
// once; callers write results into per-index slots so output never depends on
// scheduling. If tasks throw, the exception from the lowest failing index is
// rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

unsigned default_jobs() noexcept;

}  // namespace teamcomm
