#include <benchmark/benchmark.h>

#include <spintorus/integrability.hpp>

using namespace spintorus;

static void BM_CheckIntegrability(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  const GeneratorSet gens = kepler_generator_set(cfg);
  const auto sampler = kepler_bound_sampler(cfg, 0.5, 4.0);
  const auto points = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_integrability(gens, sampler, points, 42).max_residual);
}
BENCHMARK(BM_CheckIntegrability)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_BundleGeometry(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  const double L = 1.5;
  const ExcessEnergy w{0.5 * circular_orbit(L, cfg).energy.value};
  for (auto _ : state) benchmark::DoNotOptimize(check_bundle_geometry(w, L, 1.0, cfg, 5).max_deviation);
}
BENCHMARK(BM_BundleGeometry)->Unit(benchmark::kMillisecond);
