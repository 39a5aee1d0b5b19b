// OpenMP helpers. Reductions are summed per fixed-size block and the block
// partials are combined in index order, so results do not depend on the
// number of threads.
#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace curemc::parallel {

inline constexpr std::size_t kBlockSize = 256;

inline bool in_parallel_region() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return false;
#endif
}

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

/// sum_{i<n} term(i), deterministic across thread counts.
template <class Term>
double block_sum(std::size_t n, Term&& term) {
  const std::size_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<double> partial(n_blocks, 0.0);
  const bool go_parallel = n_blocks > 1 && !in_parallel_region();
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlockSize;
    const std::size_t hi = std::min(n, lo + kBlockSize);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

/// Vector-valued version: term(i, acc) adds subject i's contribution into acc
/// (length dim). Returns the ordered sum of block partials.
template <class Term>
std::vector<double> block_sum_vec(std::size_t n, std::size_t dim, Term&& term) {
  const std::size_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<double> partial(n_blocks * dim, 0.0);
  const bool go_parallel = n_blocks > 1 && !in_parallel_region();
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlockSize;
    const std::size_t hi = std::min(n, lo + kBlockSize);
    std::span<double> acc(partial.data() + static_cast<std::size_t>(b) * dim, dim);
    for (std::size_t i = lo; i < hi; ++i) term(i, acc);
  }
  std::vector<double> total(dim, 0.0);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t j = 0; j < dim; ++j) total[j] += partial[b * dim + j];
  }
  return total;
}

/// Element-wise map over [0, n), parallel when not already nested.
template <class Body>
void for_each_index(std::size_t n, Body&& body) {
  const bool go_parallel = n > kBlockSize && !in_parallel_region();
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) body(static_cast<std::size_t>(i));
}

}  // namespace curemc::parallel
