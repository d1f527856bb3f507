#pragma once

#include <functional>

namespace hb {

/// Worker count: HB_THREADS if set and positive, else hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n); chunks go to at most worker_count() threads.
/// Callers must make the iterations independent.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace hb
