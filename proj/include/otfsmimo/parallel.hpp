#ifndef OTFSMIMO_PARALLEL_HPP
#define OTFSMIMO_PARALLEL_HPP

#include <functional>

namespace otfsmimo {

/// Run fn(0..n_jobs-1) on up to `threads` workers (0 = hardware
/// concurrency). Job outputs must go to per-job slots; reductions happen on
/// the caller's side in job order, so results do not depend on the thread
/// count. The first exception thrown by any job is rethrown.
void parallel_for(int n_jobs, int threads, const std::function<void(int)>& fn);

int resolve_thread_count(int requested);

}  // namespace otfsmimo

#endif  // OTFSMIMO_PARALLEL_HPP
