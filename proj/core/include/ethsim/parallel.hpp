#pragma once

#include <cstddef>
#include <functional>

namespace ethsim {

// Worker count: hardware concurrency capped by ETHSIM_THREADS when set.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) across worker_count() threads. Callers write
// results into slot i, so reductions afterwards are order-independent.
// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ethsim
