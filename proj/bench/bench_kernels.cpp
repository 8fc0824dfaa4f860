// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

#include "betalab/counterexample.hpp"
#include "betalab/kernels.hpp"

using namespace betalab;

namespace {

std::vector<double> uniform_points(long n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = u(rng);
  return x;
}

template <bool Parallel>
void BM_weyl(benchmark::State& state) {
  const auto x = uniform_points(state.range(0), 1);
  std::vector<long> ms;
  for (long m = 1; m <= 256; ++m) ms.push_back(m);
  const std::vector<long> cps{state.range(0) / 4, state.range(0) / 2, state.range(0)};
  std::vector<std::complex<double>> out;
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel_weyl(x, ms, cps, out);
    else
      kernels::serial_weyl(x, ms, cps, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<long>(ms.size()));
}

template <bool Parallel>
void BM_scaled_energy(benchmark::State& state) {
  const auto y = uniform_points(state.range(0), 2);
  const std::vector<double> w(y.size(), 1.0 / static_cast<double>(y.size()));
  for (auto _ : state) {
    const double v = Parallel ? kernels::parallel_scaled_energy(y, w, 512.0, std::log(1.618), 2048)
                              : kernels::serial_scaled_energy(y, w, 512.0, std::log(1.618), 2048);
    benchmark::DoNotOptimize(v);
  }
}

template <bool Parallel>
void BM_ssm_abs(benchmark::State& state) {
  std::vector<double> xi(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = 1.0 + 0.125 * static_cast<double>(i);
  std::vector<double> out;
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel_ssm_abs(xi, 2.2, 0.5, 1e-12, out);
    else
      kernels::serial_ssm_abs(xi, 2.2, 0.5, 1e-12, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_near_diagonal(benchmark::State& state) {
  const auto p = build_schedule(3, mpq_class(1, 4), 2);
  const auto proc = make_coded_process(p, 2);
  for (auto _ : state) {
    const auto e = estimate_near_diagonal(proc, p, 2, 10000, 200, 1, Parallel);
    benchmark::DoNotOptimize(e.estimate);
  }
}

}  // namespace

BENCHMARK(BM_weyl<false>)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_weyl<true>)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_scaled_energy<false>)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scaled_energy<true>)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ssm_abs<false>)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ssm_abs<true>)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_near_diagonal<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_near_diagonal<true>)->Unit(benchmark::kMillisecond)->UseRealTime();

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
