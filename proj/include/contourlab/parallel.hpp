#pragma once

#include <cstddef>
#include <functional>

namespace contourlab {

/// Worker count: CONTOURLAB_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
unsigned thread_count();

/// Runs fn(i) for i in [0, n) on up to thread_count() threads. Each index is
/// processed exactly once; the exception of the lowest failing index is
/// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace contourlab
