#pragma once

#include <cstddef>
#include <functional>

namespace chemoband {

/// Number of worker threads: CHEMOBAND_THREADS when set to a positive
/// integer, otherwise the hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Work items
/// must not depend on each other; results should be written to per-index
/// slots so that reductions stay in index order. The first exception thrown
/// by any item is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace chemoband
