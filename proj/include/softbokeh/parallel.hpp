#pragma once

#include <cstddef>
#include <functional>

namespace softbokeh {

/// Worker count used by internally parallel operations. Defaults to the
/// hardware concurrency; 0 restores the default. Results never depend on it.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs `body(i)` for i in [0, n) on up to thread_count() threads. Each index
/// is processed exactly once; the assignment of indices to threads is static.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace softbokeh
