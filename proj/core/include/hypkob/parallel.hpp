#pragma once

#include <cstddef>
#include <functional>

namespace hypkob {

/// Worker count: HYPKOB_THREADS if set, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) across thread_count() workers. Exceptions
/// thrown by body are rethrown on the calling thread (first one by index).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hypkob
