#pragma once

#include <cstddef>
#include <functional>

namespace meshstyle {

// Number of worker threads: hardware concurrency, capped by the
// MESHSTYLE_THREADS environment variable when set to a positive integer.
int worker_count();

// Runs body(i) for every i in [0, count). Iterations must be independent;
// work is handed out in contiguous chunks of `grain` indices. Exceptions
// thrown by the body are rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t grain = 64);

}  // namespace meshstyle
