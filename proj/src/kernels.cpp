#include "dsmhn/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsmhn::kernels {

namespace {

std::atomic<int> g_threads{-1};

int threads_from_env() {
  const char* env = std::getenv("DSMHN_THREADS");
  if (env == nullptr) return 0;
  try {
    const int n = std::stoi(env);
    return n < 0 ? 0 : n;
  } catch (...) {
    return 0;
  }
}

// Row-block kernels shared by both namespaces so the per-element summation
// order is identical: every output element accumulates over the inner
// dimension in ascending index order.

constexpr std::size_t kRowBlock = 4;

// Rows [i0, i0 + kRowBlock) of c = a·b, clipped to m. Each streamed row of b
// updates the whole block.
inline void gemm_block(std::size_t i0, std::size_t m, std::size_t k, std::size_t n,
                       const double* a, const double* b, double* c) {
  const std::size_t rows = std::min(kRowBlock, m - i0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < n; ++j) c[(i0 + r) * n + j] = 0.0;
  if (rows == kRowBlock) {
    double* c0 = c + i0 * n;
    double* c1 = c0 + n;
    double* c2 = c1 + n;
    double* c3 = c2 + n;
    const double* a0 = a + i0 * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double v0 = a0[p], v1 = a0[k + p], v2 = a0[2 * k + p], v3 = a0[3 * k + p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double bv = bp[j];
        c0[j] += v0 * bv;
        c1[j] += v1 * bv;
        c2[j] += v2 * bv;
        c3[j] += v3 * bv;
      }
    }
    return;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double* ci = c + (i0 + r) * n;
    const double* ai = a + (i0 + r) * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// Same as gemm_block with a stored transposed (k × m).
inline void gemm_at_b_block(std::size_t i0, std::size_t m, std::size_t k, std::size_t n,
                            const double* a, const double* b, double* c) {
  const std::size_t rows = std::min(kRowBlock, m - i0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < n; ++j) c[(i0 + r) * n + j] = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * m + i0;
    const double* bp = b + p * n;
    for (std::size_t r = 0; r < rows; ++r) {
      const double av = ap[r];
      double* ci = c + (i0 + r) * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

std::vector<double> transposed(std::size_t rows, std::size_t cols, const double* x) {
  std::vector<double> t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = x[r * cols + c];
  return t;
}

std::size_t row_blocks(std::size_t m) { return (m + kRowBlock - 1) / kRowBlock; }

inline void hamming_row(std::size_t q, std::span<const std::uint64_t> queries,
                        std::span<const std::uint64_t> db, std::size_t words,
                        std::span<std::uint32_t> out) {
  const std::size_t n_db = words == 0 ? 0 : db.size() / words;
  const std::uint64_t* qw = queries.data() + q * words;
  std::uint32_t* row = out.data() + q * n_db;
  for (std::size_t d = 0; d < n_db; ++d) {
    const std::uint64_t* dw = db.data() + d * words;
    std::uint32_t dist = 0;
    for (std::size_t w = 0; w < words; ++w)
      dist += static_cast<std::uint32_t>(std::popcount(qw[w] ^ dw[w]));
    row[d] = dist;
  }
}

}  // namespace

int thread_count() {
  int n = g_threads.load();
  if (n < 0) {
    n = threads_from_env();
    g_threads.store(n);
  }
#ifdef _OPENMP
  return n == 0 ? omp_get_max_threads() : n;
#else
  return 1;
#endif
}

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

namespace omp {

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c) {
  const auto blocks = static_cast<std::ptrdiff_t>(row_blocks(m));
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (m * k * n > 32768)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk)
    gemm_block(static_cast<std::size_t>(blk) * kRowBlock, m, k, n, a, b, c);
}

void gemm_at_b(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c) {
  const auto blocks = static_cast<std::ptrdiff_t>(row_blocks(m));
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (m * k * n > 32768)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk)
    gemm_at_b_block(static_cast<std::size_t>(blk) * kRowBlock, m, k, n, a, b, c);
}

void gemm_a_bt(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c) {
  const std::vector<double> bt = transposed(n, k, b);
  gemm(m, k, n, a, bt.data(), c);
}

void hamming_table(std::span<const std::uint64_t> queries,
                   std::span<const std::uint64_t> db, std::size_t words,
                   std::span<std::uint32_t> out) {
  if (words == 0) return;
  const auto n_q = static_cast<std::ptrdiff_t>(queries.size() / words);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t q = 0; q < n_q; ++q)
    hamming_row(static_cast<std::size_t>(q), queries, db, words, out);
}

}  // namespace omp

namespace serial {

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c) {
  for (std::size_t i = 0; i < m; i += kRowBlock) gemm_block(i, m, k, n, a, b, c);
}

void gemm_at_b(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c) {
  for (std::size_t i = 0; i < m; i += kRowBlock) gemm_at_b_block(i, m, k, n, a, b, c);
}

void gemm_a_bt(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c) {
  const std::vector<double> bt = transposed(n, k, b);
  gemm(m, k, n, a, bt.data(), c);
}

void hamming_table(std::span<const std::uint64_t> queries,
                   std::span<const std::uint64_t> db, std::size_t words,
                   std::span<std::uint32_t> out) {
  if (words == 0) return;
  const std::size_t n_q = queries.size() / words;
  for (std::size_t q = 0; q < n_q; ++q) hamming_row(q, queries, db, words, out);
}

}  // namespace serial

}  // namespace dsmhn::kernels
