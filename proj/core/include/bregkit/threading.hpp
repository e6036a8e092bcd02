#pragma once

#include <cstddef>
#include <functional>

namespace bregkit {

// Thread cap from BREGKIT_THREADS (0 or unset = hardware concurrency,
// 1 = serial). Read once per process.
int thread_budget();

// Runs fn(i) for i in [0, n). Work items must write to disjoint state;
// scheduling is a static block partition, so results are deterministic
// for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace bregkit
