#pragma once

#include <cstddef>
#include <functional>

namespace randcheck {

// Runs body(i) for i in [0, n) on up to `workers` threads. Tasks are handed
// out dynamically; callers write results into slot i so output order never
// depends on scheduling. If tasks throw, the exception of the lowest index
// is rethrown after all threads join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace randcheck
