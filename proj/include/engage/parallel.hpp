#pragma once

#include <cstddef>
#include <exception>
#include <limits>

#include <omp.h>

namespace engage {

/// OpenMP loop over [0, n) that stays exception-safe: the error thrown by the lowest failing
/// index is rethrown after the loop, independent of scheduling.
template <class F>
void parallel_for(std::ptrdiff_t n, F&& body) {
  std::exception_ptr first;
  std::ptrdiff_t first_index = std::numeric_limits<std::ptrdiff_t>::max();
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(engage_parallel_for_error)
      if (i < first_index) {
        first_index = i;
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace engage
