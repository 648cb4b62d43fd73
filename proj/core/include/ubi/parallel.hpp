#pragma once

#include <cstddef>
#include <functional>

namespace ubi {

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = all cores).
// Static block partition; workers write disjoint result slots, so outputs
// are independent of the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

int effective_threads(int requested);

}  // namespace ubi
