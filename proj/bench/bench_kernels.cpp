// OpenMP kernels against their serial references.
//   ./dsmhn_bench --benchmark_filter=gemm
// DSMHN_THREADS caps the OpenMP thread count.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "dsmhn/codes.hpp"
#include "dsmhn/kernels.hpp"
#include "dsmhn/pipeline.hpp"
#include "dsmhn/retrieval.hpp"
#include "dsmhn/rng.hpp"

using namespace dsmhn;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

std::vector<std::uint64_t> random_words(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint64_t> v(n);
  for (auto& w : v) w = rng.bits();
  return v;
}

// Batch 128 through a 512-wide hidden layer.
template <auto Gemm>
void BM_gemm(benchmark::State& state) {
  const std::size_t m = state.range(0), k = 512, n = 512;
  const auto a = random_values(m * k, 1), b = random_values(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    Gemm(m, k, n, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * m * k * n);
}

template <auto Gemm>
void BM_gemm_at_b(benchmark::State& state) {
  const std::size_t m = 512, k = state.range(0), n = 512;
  const auto a = random_values(k * m, 3), b = random_values(k * n, 4);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    Gemm(m, k, n, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * m * k * n);
}

template <auto Table>
void BM_hamming_table(benchmark::State& state) {
  const std::size_t nq = 240, nd = state.range(0), words = 1;
  const auto q = random_words(nq * words, 5), d = random_words(nd * words, 6);
  std::vector<std::uint32_t> out(nq * nd);
  for (auto _ : state) {
    Table(q, d, words, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * nq * nd);
}

template <bool Parallel>
void BM_evaluate(benchmark::State& state) {
  const std::size_t nq = 240, nd = state.range(0), classes = 4;
  Rng rng(7);
  const BinaryCodes q = random_codes(16, nq, rng), d = random_codes(16, nd, rng);
  Matrix ql(nq, classes, 0.0), dl(nd, classes, 0.0);
  for (std::size_t i = 0; i < nq; ++i) ql(i, rng.index(classes)) = 1.0;
  for (std::size_t i = 0; i < nd; ++i) dl(i, rng.index(classes)) = 1.0;
  const std::vector<std::size_t> ks{1, 100};
  for (auto _ : state) {
    EvalReport r = Parallel ? evaluate(q, ql, d, dl, ks) : evaluate_serial(q, ql, d, dl, ks);
    benchmark::DoNotOptimize(r.map);
  }
  state.SetItemsProcessed(state.iterations() * nq * nd);
}

}  // namespace

BENCHMARK(BM_gemm<kernels::serial::gemm>)->Name("gemm/serial")->Arg(32)->Arg(128);
BENCHMARK(BM_gemm<kernels::omp::gemm>)->Name("gemm/omp")->Arg(32)->Arg(128)->UseRealTime();
BENCHMARK(BM_gemm_at_b<kernels::serial::gemm_at_b>)->Name("gemm_at_b/serial")->Arg(128);
BENCHMARK(BM_gemm_at_b<kernels::omp::gemm_at_b>)->Name("gemm_at_b/omp")->Arg(128)->UseRealTime();
BENCHMARK(BM_hamming_table<kernels::serial::hamming_table>)->Name("hamming_table/serial")->Arg(960)->Arg(20000);
BENCHMARK(BM_hamming_table<kernels::omp::hamming_table>)->Name("hamming_table/omp")->Arg(960)->Arg(20000)->UseRealTime();
BENCHMARK(BM_evaluate<false>)->Name("evaluate/serial")->Arg(960)->Arg(5000);
BENCHMARK(BM_evaluate<true>)->Name("evaluate/omp")->Arg(960)->Arg(5000)->UseRealTime();

BENCHMARK_MAIN();
