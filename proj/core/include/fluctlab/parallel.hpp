#pragma once

#include <functional>

namespace fluctlab::statlab {

/// Thread count resolution: explicit request > FLUCTLAB_THREADS env var >
/// hardware concurrency; always at least 1.
int resolve_threads(int requested);

/// Runs body(0..n-1) on `threads` workers. Each index is claimed exactly once
/// (atomic counter); bodies must write only to their own slots, which keeps
/// merged results independent of scheduling. The first exception thrown by a
/// body is rethrown on the caller after all workers join.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace fluctlab::statlab
