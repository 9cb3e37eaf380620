#pragma once

#include <cstdint>
#include <functional>

namespace phi4lab {

// Worker cap from PHI4LAB_THREADS (read on every call), else hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0, n) over contiguous chunks. Each index must write only
// its own outputs; any reduction happens afterwards in index order, so results
// do not depend on the worker count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace phi4lab
