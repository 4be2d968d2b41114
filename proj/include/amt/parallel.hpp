#pragma once

#include <functional>

namespace amt {

// Worker count used by the kernels. Work is only ever split across
// independent output elements, so the value never changes results.
void set_num_threads(int threads);
int num_threads();

// Runs fn(i) for every i in [begin, end), partitioned into contiguous
// chunks across num_threads() workers.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace amt
