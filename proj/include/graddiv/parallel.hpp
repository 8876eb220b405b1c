#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace graddiv::par {

// Reductions are chunked with a fixed block size and the partial sums are
// combined in index order, so results are bit-identical for any thread count.
inline constexpr std::int64_t kReduceChunk = 8192;

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// fn(r) for r in [0, n); iterations must write disjoint data.
template <class Fn>
inline void parallel_rows(int n, Fn&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n; ++r) fn(r);
#else
  for (int r = 0; r < n; ++r) fn(r);
#endif
}

// fn(f) for f in [0, n); disjoint elementwise writes only.
template <class Fn>
inline void parallel_elems(std::int64_t n, Fn&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::int64_t f = 0; f < n; ++f) fn(f);
#else
  for (std::int64_t f = 0; f < n; ++f) fn(f);
#endif
}

// Deterministic sum of term(i) for i in [0, n).
template <class Fn>
inline double chunked_sum(std::int64_t n, Fn&& term) {
  const std::int64_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  if (nchunks <= 1) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t c = 0; c < nchunks; ++c) {
    const std::int64_t lo = c * kReduceChunk;
    const std::int64_t hi = std::min<std::int64_t>(lo + kReduceChunk, n);
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace graddiv::par
