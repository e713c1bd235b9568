#pragma once

#include <cstddef>
#include <functional>

namespace branchlab {

/// Worker count: explicit value if positive, else BRANCHLAB_THREADS, else hardware concurrency.
unsigned resolve_threads(int requested = 0);

/// Process-wide default used when a call site passes 0 threads. Set by the CLI.
void set_default_threads(int threads);

/// Runs body(i) for i in [0, n) on `threads` workers (0 = default). Each index is
/// executed exactly once; results must be written to per-index slots so the merge
/// is order independent. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace branchlab
