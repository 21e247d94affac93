#pragma once

#include <cstddef>
#include <functional>

namespace aviary {

/// Worker cap used by parallel_for. Resolution order: explicit set_thread_count,
/// the AVIARY_THREADS environment variable, then hardware concurrency.
int thread_count();
void set_thread_count(int n);

/// Runs fn(i) for i in [0, n) on up to thread_count() workers with a static
/// partition. Each index is touched by exactly one worker, so any computation
/// whose cells are independent gives results identical to a serial run.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Block variant: fn(begin, end) over disjoint contiguous ranges.
void parallel_for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace aviary
