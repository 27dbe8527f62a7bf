#pragma once

#include <functional>

namespace colonmap {

// Effective worker count: COLONMAP_THREADS if set (clamped to >= 1),
// otherwise the machine's core count.
int thread_budget();

// Runs fn(i) for i in [0, count) split into contiguous static chunks, one
// worker per chunk. Each index is processed exactly once and workers write
// to disjoint outputs, so results are independent of the thread count.
void parallel_for(int count, const std::function<void(int)> &fn);

} // namespace colonmap
