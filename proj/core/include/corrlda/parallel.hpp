#pragma once

#include <cstddef>
#include <functional>

namespace corrlda {

// Worker count for data-parallel loops: the CORRLDA_THREADS environment
// variable bounds it; 0, unset, or unparsable means hardware concurrency.
// Never more workers than jobs, never fewer than 1.
std::size_t worker_count(std::size_t jobs);

// Runs fn over contiguous index ranges covering [0, n) on worker_count(n)
// threads. fn must not touch shared mutable state; any exception thrown by
// a worker is rethrown on the calling thread. Results must not depend on
// scheduling — callers reduce per-index outputs in a fixed order afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace corrlda
