#pragma once

#include <cstddef>
#include <functional>

namespace wmb {

/// Worker count: WMBRIDGE_THREADS if set (>= 1), else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n), splitting contiguous chunks across
/// thread_count() workers. Each index is touched by exactly one worker, so
/// results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wmb
