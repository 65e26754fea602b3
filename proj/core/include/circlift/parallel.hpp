#pragma once

#include <cstddef>
#include <functional>

namespace circlift {

// Worker count used by parallel loops: CIRCLIFT_THREADS env var if set,
// otherwise hardware concurrency. Always >= 1.
int worker_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers (default worker_count()).
// Work items must be independent; callers make results deterministic by
// writing into index i of a presized container, so scheduling never matters.
// Exceptions thrown by items are captured and the first one rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

} // namespace circlift
