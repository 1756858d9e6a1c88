#include <benchmark/benchmark.h>

#include <spintorus/kepler.hpp>

using namespace spintorus;

static void BM_RadialAction(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  const double L = 1.5;
  const ExcessEnergy w{0.5 * circular_orbit(L, cfg).energy.value};
  for (auto _ : state) benchmark::DoNotOptimize(radial_action(w, L, cfg));
}
BENCHMARK(BM_RadialAction)->Unit(benchmark::kMicrosecond);

static void BM_OrbitParams(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  const double L = 1.5;
  const ExcessEnergy w{0.5 * circular_orbit(L, cfg).energy.value};
  for (auto _ : state) benchmark::DoNotOptimize(orbit_params(w, L, cfg));
}
BENCHMARK(BM_OrbitParams)->Unit(benchmark::kMicrosecond);

// Spin rotation angle of C_r (one radial period of skew-product flow).
static void BM_SpinAngleRadial(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  const double L = 1.5;
  const ExcessEnergy w{0.5 * circular_orbit(L, cfg).energy.value};
  const auto cycles = build_cycles(w, L, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(spin_rotation_angle(cycles.first, w, L, cfg).alpha);
}
BENCHMARK(BM_SpinAngleRadial)->Unit(benchmark::kMillisecond);

static void BM_SpinAngleHarmonic(benchmark::State& state) {
  const FieldConfig cfg = harmonic_field(1e-6);
  const double L = 1.5;
  const double wc = circular_orbit(L, cfg).energy.value;
  const ExcessEnergy w{1.5 * wc};
  const auto cycles = build_cycles(w, L, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(spin_rotation_angle(cycles.first, w, L, cfg).alpha);
}
BENCHMARK(BM_SpinAngleHarmonic)->Unit(benchmark::kMillisecond);
