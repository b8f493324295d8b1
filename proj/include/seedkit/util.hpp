#pragma once

#include <cstddef>
#include <functional>

namespace seedkit {

// Runs fn(0..n-1) on up to `jobs` worker threads (serial when jobs <= 1).
// Items must be independent; the first exception thrown by any worker is
// rethrown on the calling thread after all workers finish.
void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn);

}  // namespace seedkit
