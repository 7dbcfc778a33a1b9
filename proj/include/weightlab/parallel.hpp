#pragma once

#include <cstddef>
#include <functional>

namespace weightlab {

/// Worker count: WEIGHTLAB_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Each index is handled by exactly one worker,
/// so results written per index are identical to a serial run.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace weightlab
