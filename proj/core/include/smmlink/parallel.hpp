#pragma once

// Minimal fork-join loop.  Work items are claimed from an atomic counter
// and write to caller-owned slots keyed by index, so results never depend
// on the thread count.

#include <cstddef>
#include <functional>

namespace smmlink {

/// Worker count: SMMLINK_THREADS if set and positive, otherwise the
/// hardware concurrency (at least one).
[[nodiscard]] unsigned worker_count();

/// Calls body(i) for i in [0, n).  The first exception thrown by any body
/// is rethrown after all workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace smmlink
