#include <benchmark/benchmark.h>

#include <spintorus/quantize.hpp>

using namespace spintorus;

static void BM_SolveEnergy(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  for (auto _ : state) benchmark::DoNotOptimize(solve_energy(1.0, 2.0, cfg).value);
}
BENCHMARK(BM_SolveEnergy)->Unit(benchmark::kMicrosecond);

static void BM_SolveLevelEbkSpin(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  QuantumNumbers qn;
  qn.n_r = 1;
  qn.l = 1;
  qn.twice_m_s = 1;
  for (auto _ : state) benchmark::DoNotOptimize(solve_level(qn, cfg, Scheme::ebk_spin).E);
}
BENCHMARK(BM_SolveLevelEbkSpin)->Unit(benchmark::kMillisecond);

// Full spectrum up to the given principal index.
static void BM_EnumerateLevels(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  const int n_max = static_cast<int>(state.range(0));
  const auto scheme = static_cast<Scheme>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_levels(n_max, cfg, scheme).levels.size());
}
BENCHMARK(BM_EnumerateLevels)
    ->Args({4, static_cast<int>(Scheme::sommerfeld_old)})
    ->Args({4, static_cast<int>(Scheme::ebk_spin)})
    ->Args({6, static_cast<int>(Scheme::ebk_spin)})
    ->Unit(benchmark::kMillisecond);
