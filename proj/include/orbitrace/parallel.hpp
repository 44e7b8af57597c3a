#pragma once

#include <cstddef>
#include <functional>

namespace orbitrace {

/// Worker count: ORBITRACE_THREADS if set (>= 1), else the hardware concurrency.
unsigned thread_limit();

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 means thread_limit()).
/// Every index runs exactly once; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace orbitrace
