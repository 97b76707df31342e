#pragma once

#include <cstddef>
#include <functional>

namespace absim {

// Worker count: ABERRSIM_THREADS if set (>0), else hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0, n) on worker_count() threads. Indices are
// partitioned statically; fn must only write to per-index state. The first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace absim
