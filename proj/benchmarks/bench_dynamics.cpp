#include <cmath>

#include <benchmark/benchmark.h>

#include <spintorus/dynamics.hpp>
#include <spintorus/kepler.hpp>

using namespace spintorus;

namespace {

PhasePoint kepler_start(const FieldConfig& cfg, double L) {
  TorusChart chart;
  chart.L = L;
  chart.w = {0.5 * circular_orbit(L, cfg).energy.value};
  return torus_point(chart, cfg);
}

}  // namespace

// One radial period of the Coulomb flow with the spin transporter.
static void BM_HamiltonianFlowPeriod(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  const double L = 2.0;
  const PhasePoint init = kepler_start(cfg, L);
  const double T = radial_period(ExcessEnergy{0.5 * circular_orbit(L, cfg).energy.value}, L, cfg);
  const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  FlowOptions opt;
  opt.tolerance = tol;
  opt.record_steps = false;
  std::size_t turns = 0;
  for (auto _ : state) {
    const Trajectory traj = hamiltonian_flow(init, cfg, Branch::positive, T, opt);
    benchmark::DoNotOptimize(traj.states.back());
    turns = traj.turning_times.size();
  }
  state.counters["turning_points"] = static_cast<double>(turns);
}
BENCHMARK(BM_HamiltonianFlowPeriod)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMicrosecond);

static void BM_PrecessSpin(benchmark::State& state) {
  const FieldConfig cfg = coulomb_field();
  const double L = 2.0;
  const PhasePoint init = kepler_start(cfg, L);
  const double T = radial_period(ExcessEnergy{0.5 * circular_orbit(L, cfg).energy.value}, L, cfg);
  const Trajectory traj = hamiltonian_flow(init, cfg, Branch::positive, T, 1e-10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(precess_spin(traj, cfg, Vec3(0.0, 0.6, 0.8)).spins.back());
  }
}
BENCHMARK(BM_PrecessSpin)->Unit(benchmark::kMicrosecond);

static void BM_Su2ToSo3(benchmark::State& state) {
  const SpinRotor d = SpinRotor::from_axis_angle(Vec3(1.0, 2.0, 3.0).normalized(), 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(su2_to_so3(d));
}
BENCHMARK(BM_Su2ToSo3);
