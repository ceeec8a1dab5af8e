#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version (namespace
// omp) used by the library and a serial version (namespace serial) with the
// same per-element arithmetic order, kept as the reference the tests and the
// benchmark compare against. Both produce bit-identical results.

#include <cstddef>
#include <cstdint>
#include <span>

namespace dsmhn::kernels {

/// Number of threads the OpenMP kernels may use. Reads DSMHN_THREADS once
/// (0 or unset = runtime default).
int thread_count();
void set_thread_count(int n);

namespace omp {

/// c[m×n] = a[m×k] · b[k×n], row-major, c overwritten.
void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c);
/// c[m×n] = a[k×m]ᵀ · b[k×n].
void gemm_at_b(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c);
/// c[m×n] = a[m×k] · b[n×k]ᵀ.
void gemm_a_bt(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c);

/// out[q * n_db + d] = popcount(query_q xor db_d) over `words` words each.
void hamming_table(std::span<const std::uint64_t> queries,
                   std::span<const std::uint64_t> db, std::size_t words,
                   std::span<std::uint32_t> out);

}  // namespace omp

namespace serial {

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c);
void gemm_at_b(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c);
void gemm_a_bt(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c);
void hamming_table(std::span<const std::uint64_t> queries,
                   std::span<const std::uint64_t> db, std::size_t words,
                   std::span<std::uint32_t> out);

}  // namespace serial

}  // namespace dsmhn::kernels
