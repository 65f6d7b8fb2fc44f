#pragma once

#include <cstddef>
#include <functional>

namespace tameval {

/// Upper bound on worker threads used by the engine. Results never depend on it.
std::size_t max_threads();
void set_max_threads(std::size_t n);  // 0 restores the hardware default

/// Runs body(begin, end) over contiguous chunks of [0, count). Chunk boundaries
/// depend only on count, so any per-index output is scheduler-independent.
/// The first exception (by chunk order) is rethrown on the calling thread.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace tameval
