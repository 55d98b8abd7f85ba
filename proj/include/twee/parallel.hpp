#pragma once

#include <cstddef>
#include <functional>

namespace twee {

/// Worker count used when a caller passes 0.
std::size_t default_thread_count();

/// Calls body(i) for i in [0, n) on up to `threads` workers. Indices are handed
/// out dynamically; callers write results by index so the output does not
/// depend on scheduling. The first exception thrown by any call is rethrown
/// after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace twee
