#pragma once

#include <cstddef>
#include <functional>

namespace visword {

/// Worker count: hardware concurrency, capped by the VISWORD_THREADS
/// environment variable when it holds a positive integer.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) across worker_count() threads. Each index is
/// visited exactly once; callers write results by index so output order is
/// deterministic. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace visword
