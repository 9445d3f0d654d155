// serial vs OpenMP field tabulation; on a single core the two should time the same
#include <benchmark/benchmark.h>

#include "hypwhitney/experiment.hpp"

using namespace hw;

namespace {

TestFunction bench_function() {
  const auto p = scaling_pair(0.03125, 0.125, 32);
  return TestFunction::indicator(first_carrier(p));
}

QuadratureSpec bench_spec(int n) {
  QuadratureSpec q;
  q.grid = {n, n, n};
  q.truncation = {256, 256, 256};
  return q;
}

void BM_field_serial(benchmark::State& st) {
  const auto f = bench_function();
  const auto q = bench_spec(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(field_serial(f, PhaseFamily::base(), q).values.data());
}

void BM_field_parallel(benchmark::State& st) {
  const auto f = bench_function();
  const auto q = bench_spec(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(field_parallel(f, PhaseFamily::base(), q).values.data());
}

void BM_identities(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(audit_identities(static_cast<std::size_t>(st.range(0)), 1).failures);
}

}  // namespace

BENCHMARK(BM_field_serial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_field_parallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_identities)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
