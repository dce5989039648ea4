#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace udw {

// Execution policy for table builds and scans. Parallel loops must write
// only to their own slot (one index, one result) so that serial and
// parallel runs produce byte-identical output; any reduction happens in a
// deterministic post-loop pass.
enum class Exec { serial, parallel };

template <typename Body>
void parallel_for(Exec exec, std::ptrdiff_t n, const Body& body) {
#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
#else
  (void)exec;
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace udw
