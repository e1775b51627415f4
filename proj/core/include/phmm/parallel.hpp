#pragma once

#include <functional>

namespace phmm {

/// Thread cap for internal parallelism: PHMM_THREADS if set (minimum 1),
/// otherwise the hardware concurrency.
int max_threads();

/// Runs fn(0) ... fn(n - 1), possibly across threads. Results must be
/// written to per-index slots; any reduction happens afterwards in index
/// order so the outcome does not depend on the number of threads. The
/// first exception thrown by a worker is rethrown.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace phmm
