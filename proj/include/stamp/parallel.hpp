#pragma once

#include <cstdint>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stamp {

/// Global worker count for parallel_for. 1 selects the serial reference
/// path; 0 means "hardware default".
void set_threads(int n);
int threads();
int hardware_threads();

namespace detail {
int resolved_threads();
}

/// Data-parallel loop over [0, n). Thread count comes from set_threads();
/// with 1 thread the plain serial loop runs. Each index must be
/// independent of the others; reductions are done by the caller over a
/// results array so output never depends on scheduling. Exceptions thrown
/// by the body are captured and rethrown after the loop joins.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
  const int nt = detail::resolved_threads();
#ifdef _OPENMP
  if (nt > 1 && n > 1) {
    std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
#pragma omp critical(stamp_parallel_for_err)
        if (!err)
          err = std::current_exception();
      }
    }
    if (err)
      std::rethrow_exception(err);
    return;
  }
#else
  (void)nt;
#endif
  for (std::int64_t i = 0; i < n; ++i)
    body(i);
}

/// Serial reference loop; semantics identical to parallel_for with 1 thread.
template <class F>
void serial_for(std::int64_t n, F&& body) {
  for (std::int64_t i = 0; i < n; ++i)
    body(i);
}

} // namespace stamp
