// Parallel execution of independent trials.
#pragma once

#include <cstdint>
#include <exception>
#include <functional>

namespace backbone {

// Thread count from BACKBONE_THREADS, else the hardware concurrency (at least 1).
unsigned default_threads();

// Calls body(i) for every i in [0, count) on up to `threads` workers. Work is
// handed out in index order; the first exception thrown by any call is
// rethrown after all workers stop.
void parallel_for(std::uint64_t count, unsigned threads, const std::function<void(std::uint64_t)>& body);

} // namespace backbone
