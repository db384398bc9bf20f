#pragma once

#include <cstddef>
#include <functional>

namespace mixlab {

/// Worker count from MIXLAB_WORKERS, defaulting to hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Each index
/// runs exactly once; callers merge per-index results themselves so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mixlab
