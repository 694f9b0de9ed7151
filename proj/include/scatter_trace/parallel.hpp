#pragma once

#include <cstddef>
#include <functional>

namespace scatter_trace {

// Number of worker threads: SCATTER_TRACE_THREADS if set, else hardware count.
int thread_count();

// Runs body(i) for i in [0, n). Each index is written independently by the
// caller, so results are deterministic regardless of the thread count.
// Exceptions from workers are rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace scatter_trace
