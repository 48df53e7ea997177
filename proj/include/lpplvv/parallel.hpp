#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace lpplvv {

enum class Execution { serial, parallel };

// out[i] = f(i) for i in [0, n). The parallel branch writes into
// preallocated slots, so the result does not depend on scheduling.
// Exceptions are captured per slot and the lowest-index one is rethrown.
template <class T, class F>
std::vector<T> indexed_map(std::size_t n, Execution ex, F&& f) {
  std::vector<T> out(n);
  if (ex == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = f(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

inline void set_worker_count(int workers) {
  if (workers > 0) omp_set_num_threads(workers);
}

}  // namespace lpplvv
