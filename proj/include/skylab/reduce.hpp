#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace skylab {

/// Sum of a contiguous range over a fixed binary tree. The tree depends only
/// on the length, so the result is bitwise reproducible on any thread count.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Number of threads the reduction pool may use. Capped by the
/// SKYRMION_LAB_THREADS environment variable (see set_thread_cap).
int reduction_threads();

/// Cap the pool (0 = no explicit cap; use OpenMP defaults / env).
void set_thread_cap(int n);

/// Row-parallel grid reduction with K simultaneous accumulators.
///
/// node(i, j, acc) adds node (i,j)'s contribution into acc[0..K). Each row is
/// summed over the fixed pairwise tree, rows are combined over another fixed
/// tree, so results are bitwise identical for every thread count.
template <int K, class NodeF>
std::array<double, K> grid_reduce(int n, NodeF&& node) {
  const std::size_t un = static_cast<std::size_t>(n);
  std::vector<double> row_sums(un * K);
#ifdef _OPENMP
#pragma omp parallel num_threads(reduction_threads())
  {
    std::vector<double> buf(un * K);  // K contiguous lanes of length n
#pragma omp for schedule(static)
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        double acc[K] = {};
        node(i, j, acc);
        for (int q = 0; q < K; ++q) buf[static_cast<std::size_t>(q) * un + i] = acc[q];
      }
      for (int q = 0; q < K; ++q)
        row_sums[static_cast<std::size_t>(j) * K + q] =
            pairwise_sum(std::span<const double>(buf.data() + static_cast<std::size_t>(q) * un, un));
    }
  }
#else
  std::vector<double> buf(un * K);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      double acc[K] = {};
      node(i, j, acc);
      for (int q = 0; q < K; ++q) buf[static_cast<std::size_t>(q) * un + i] = acc[q];
    }
    for (int q = 0; q < K; ++q)
      row_sums[static_cast<std::size_t>(j) * K + q] =
          pairwise_sum(std::span<const double>(buf.data() + static_cast<std::size_t>(q) * un, un));
  }
#endif
  std::array<double, K> out{};
  std::vector<double> col(un);
  for (int q = 0; q < K; ++q) {
    for (int j = 0; j < n; ++j) col[j] = row_sums[static_cast<std::size_t>(j) * K + q];
    out[q] = pairwise_sum(col);
  }
  return out;
}

/// Parallel loop over rows (no reduction); used by field-filling kernels.
template <class RowF>
void parallel_rows(int n, RowF&& row) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(reduction_threads())
#endif
  for (int j = 0; j < n; ++j) row(j);
}

}  // namespace skylab
