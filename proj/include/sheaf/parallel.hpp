#pragma once

#include <cstddef>
#include <functional>

namespace sheaf {

/// Worker count: hardware concurrency, capped by SHEAFCTL_THREADS when set
/// and by set_thread_limit() when called. Always at least 1.
std::size_t thread_count();
void set_thread_limit(std::size_t limit);  // 0 removes the programmatic cap

/// Runs body(i) for i in [0, n) over a static partition of the index range.
/// Results must be written per index; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sheaf
