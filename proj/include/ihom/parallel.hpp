#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ihom {

inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

template <class F>
void parallel_for(std::int64_t n, F&& body) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

// Sum of term(i) over [0, n). Partial sums are taken over fixed-size blocks
// and folded pairwise in block order, so the result does not depend on the
// number of workers.
template <class F>
double block_sum(std::int64_t n, F&& term) {
  constexpr std::int64_t kBlock = 4096;
  if (n <= 0) return 0.0;
  const std::int64_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nb; ++b) {
    const std::int64_t lo = b * kBlock;
    const std::int64_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  for (std::int64_t stride = 1; stride < nb; stride *= 2)
    for (std::int64_t b = 0; b + stride < nb; b += 2 * stride)
      partial[static_cast<std::size_t>(b)] += partial[static_cast<std::size_t>(b + stride)];
  return partial[0];
}

}  // namespace ihom
