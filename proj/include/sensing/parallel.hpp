#pragma once

#include <cstddef>
#include <functional>

namespace sensing {

// Worker count: the explicit value if positive, else SENSING_LIMITS_THREADS,
// else the hardware concurrency.
int resolve_threads(int requested = 0);

// Runs body(i) for i in [0, n) on up to `threads` workers. The first
// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace sensing
