#pragma once

#include <cstddef>
#include <functional>

namespace hitr {

// Process-wide cap on worker threads for the document-/topic-parallel
// stages. 1 disables threading (default); 0 means hardware concurrency.
void set_max_jobs(unsigned jobs);
unsigned max_jobs();

// Runs fn(0), ..., fn(n-1), possibly across several threads. Each index
// must touch only its own outputs, so results are identical to a serial
// run. The first exception thrown by a worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hitr
