#include "spintorus/kepler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "spintorus/errors.hpp"

namespace spintorus {

namespace {

constexpr double kPi = std::numbers::pi;

const RadialProfile& profile(const FieldConfig& cfg) {
  if (!cfg.central) throw std::invalid_argument("orbit routines need a central potential");
  return *cfg.central;
}

void check_angmom(double L, const FieldConfig& cfg) {
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("angular momentum must be positive");
  const double k = profile(cfg).coulomb_strength;
  if (k > 0.0 && cfg.units.light_speed * L <= k) {
    throw FallToCenterError("angular momentum at or below the fall-to-centre bound");
  }
}

// Search grid in log r covering sixteen decades around the length scale.
struct Grid {
  static constexpr int kPerDecade = 40;
  static constexpr int kDecades = 16;
  static constexpr int kSize = kPerDecade * kDecades + 1;
  double lo;
  double radius(int i) const { return lo * std::pow(10.0, static_cast<double>(i) / kPerDecade); }
};

Grid grid_for(const FieldConfig& cfg) {
  return Grid{std::max(1e-8 * cfg.length_scale, 2.0 * cfg.singular_radius)};
}

double quad(const std::function<double(double)>& f) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, 0.0, kPi, 12, 1e-15);
}

// Integrands with 1/p_r: deep refinement only moves nodes into the rounding
// noise at the turning points, so the depth is capped.
double quad_inverse(const std::function<double(double)>& f) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, 0.0, kPi, 4, 1e-11);
}

bool degenerate(const TurningPoints& tp) { return tp.r_max - tp.r_min <= 1e-12 * tp.r_max; }

}  // namespace

double effective_potential(double L, double r, const FieldConfig& cfg) {
  const auto& u = cfg.units;
  const double mc2 = u.rest_energy();
  const double k2 = u.light_speed * u.light_speed * L * L / (r * r);
  return profile(cfg).potential_energy(r) + k2 / (std::sqrt(k2 + mc2 * mc2) + mc2);
}

double radial_momentum_squared(ExcessEnergy w, double L, double r, const FieldConfig& cfg) {
  const auto& u = cfg.units;
  const double c = u.light_speed;
  const double mc2 = u.rest_energy();
  const double kinetic = w.value - profile(cfg).potential_energy(r) + mc2;
  const double s = std::sqrt(c * c * L * L / (r * r) + mc2 * mc2);
  if (kinetic <= 0.0) return -s * s / (c * c);
  // (E - V)^2 - c^2 L^2 / r^2 - m^2 c^4 factored so the sign comes from w - U.
  return (w.value - effective_potential(L, r, cfg)) * (kinetic + s) / (c * c);
}

CircularOrbit circular_orbit(double L, const FieldConfig& cfg) {
  check_angmom(L, cfg);
  const Grid g = grid_for(cfg);
  int best = 0;
  double best_u = std::numeric_limits<double>::infinity();
  for (int i = 0; i < Grid::kSize; ++i) {
    const double v = effective_potential(L, g.radius(i), cfg);
    if (v < best_u) {
      best_u = v;
      best = i;
    }
  }
  if (best == 0) throw FallToCenterError("effective potential unbounded below near the origin");
  if (best == Grid::kSize - 1) throw NoBoundOrbitError("effective potential has no minimum");
  const double a = std::log(g.radius(best - 1));
  const double b = std::log(g.radius(best + 1));
  auto f = [&](double s) { return effective_potential(L, std::exp(s), cfg); };
  std::uintmax_t it = 200;
  const auto [s_min, u_min] = boost::math::tools::brent_find_minima(f, a, b, 52, it);
  return {ExcessEnergy{std::min(u_min, best_u)}, u_min <= best_u ? std::exp(s_min) : g.radius(best)};
}

TurningPoints turning_points(ExcessEnergy w, double L, const FieldConfig& cfg) {
  if (!std::isfinite(w.value)) throw std::invalid_argument("energy must be finite");
  const CircularOrbit circ = circular_orbit(L, cfg);
  const double slack = 1e-14 * std::max(std::abs(circ.energy.value), std::numeric_limits<double>::min());
  if (w.value < circ.energy.value - slack) {
    throw NoBoundOrbitError("energy below the effective-potential minimum");
  }
  if (w.value <= circ.energy.value + slack) return {circ.radius, circ.radius};

  const Grid g = grid_for(cfg);
  auto gap = [&](double r) { return w.value - effective_potential(L, r, cfg); };
  int centre = 0;
  while (centre < Grid::kSize && g.radius(centre) < circ.radius) ++centre;

  int lo = centre - 1;
  while (lo >= 0 && gap(g.radius(lo)) >= 0.0) --lo;
  if (lo < 0) throw FallToCenterError("allowed region reaches the origin");
  int hi = centre;
  while (hi < Grid::kSize && gap(g.radius(hi)) >= 0.0) ++hi;
  if (hi >= Grid::kSize) throw NoBoundOrbitError("orbit is not bounded");

  auto solve = [&](double a, double b) {
    std::uintmax_t it = 300;
    const auto [r0, r1] = boost::math::tools::toms748_solve(
        gap, a, b, boost::math::tools::eps_tolerance<double>(52), it);
    return 0.5 * (r0 + r1);
  };
  const double r_in = std::min(circ.radius, g.radius(lo + 1));
  const double r_out = std::max(circ.radius, g.radius(hi - 1));
  return {solve(g.radius(lo), r_in), solve(r_out, g.radius(hi))};
}

TurningPoints turning_points(double E, double L, const FieldConfig& cfg) {
  return turning_points(excess_energy(E, cfg), L, cfg);
}

double radial_action(ExcessEnergy w, double L, const FieldConfig& cfg) {
  const TurningPoints tp = turning_points(w, L, cfg);
  if (degenerate(tp)) return 0.0;
  const double mid = 0.5 * (tp.r_max + tp.r_min);
  const double half = 0.5 * (tp.r_max - tp.r_min);
  auto f = [&](double th) {
    const double r = mid - half * std::cos(th);
    return std::sqrt(std::max(0.0, radial_momentum_squared(w, L, r, cfg))) * half * std::sin(th);
  };
  return quad(f) / kPi;
}

double radial_action(double E, double L, const FieldConfig& cfg) {
  return radial_action(excess_energy(E, cfg), L, cfg);
}

double radial_period(ExcessEnergy w, double L, const FieldConfig& cfg) {
  const TurningPoints tp = turning_points(w, L, cfg);
  if (degenerate(tp)) throw DegenerateOrbitError("circular orbit: radial period undefined");
  const auto& u = cfg.units;
  const double c2 = u.light_speed * u.light_speed;
  const double mid = 0.5 * (tp.r_max + tp.r_min);
  const double half = 0.5 * (tp.r_max - tp.r_min);
  auto f = [&](double th) {
    const double r = mid - half * std::cos(th);
    const double kinetic = w.value - profile(cfg).potential_energy(r) + u.rest_energy();
    const double pr = std::sqrt(std::max(0.0, radial_momentum_squared(w, L, r, cfg)));
    return pr > 0.0 ? kinetic / pr * half * std::sin(th) : 0.0;
  };
  return 2.0 * quad_inverse(f) / c2;
}

double radial_period(double E, double L, const FieldConfig& cfg) {
  return radial_period(excess_energy(E, cfg), L, cfg);
}

double apsidal_angle(ExcessEnergy w, double L, const FieldConfig& cfg) {
  const TurningPoints tp = turning_points(w, L, cfg);
  if (degenerate(tp)) throw DegenerateOrbitError("circular orbit: apsidal angle undefined");
  const double mid = 0.5 * (tp.r_max + tp.r_min);
  const double half = 0.5 * (tp.r_max - tp.r_min);
  auto f = [&](double th) {
    const double r = mid - half * std::cos(th);
    const double pr = std::sqrt(std::max(0.0, radial_momentum_squared(w, L, r, cfg)));
    return pr > 0.0 ? L / (r * r * pr) * half * std::sin(th) : 0.0;
  };
  return 2.0 * quad_inverse(f);
}

double apsidal_angle(double E, double L, const FieldConfig& cfg) {
  return apsidal_angle(excess_energy(E, cfg), L, cfg);
}

OrbitParams orbit_params(ExcessEnergy w, double L, const FieldConfig& cfg) {
  const TurningPoints tp = turning_points(w, L, cfg);
  OrbitParams o{w, total_energy(w, cfg), L, tp.r_min, tp.r_max, 0.0, 0.0, 0.0};
  o.I_r = radial_action(w, L, cfg);
  o.T_r = radial_period(w, L, cfg);
  o.dphi = apsidal_angle(w, L, cfg);
  return o;
}

// ---------------------------------------------------------------------------

PhasePoint torus_point(const TorusChart& chart, const FieldConfig& cfg) {
  const TurningPoints tp = turning_points(chart.w, chart.L, cfg);
  const double mid = 0.5 * (tp.r_max + tp.r_min);
  const double half = 0.5 * (tp.r_max - tp.r_min);
  const double phase = 2.0 * kPi * (chart.radial_phase - std::floor(chart.radial_phase));
  const double r = mid - half * std::cos(phase);
  double pr = std::sqrt(std::max(0.0, radial_momentum_squared(chart.w, chart.L, r, cfg)));
  if (std::sin(phase) < 0.0) pr = -pr;

  const double ci = std::cos(chart.inclination), si = std::sin(chart.inclination);
  const double cn = std::cos(chart.node), sn = std::sin(chart.node);
  const Vec3 e1(cn, sn, 0.0);
  const Vec3 n(sn * si, -cn * si, ci);
  const Vec3 e2 = n.cross(e1);
  const Vec3 xhat = std::cos(chart.argument) * e1 + std::sin(chart.argument) * e2;
  PhasePoint pt;
  pt.x = r * xhat;
  pt.p = pr * xhat + (chart.L / r) * n.cross(xhat);
  return pt;
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::hamiltonian: return "H";
    case GeneratorKind::angular_momentum: return "|L|";
    case GeneratorKind::angular_momentum_z: return "L_z";
  }
  return "?";
}

std::string to_string(CycleLabel label) {
  switch (label) {
    case CycleLabel::radial: return "r";
    case CycleLabel::angular: return "L";
    case CycleLabel::azimuthal: return "z";
  }
  return "?";
}

std::pair<Cycle, Cycle> build_cycles(ExcessEnergy w, double L, const FieldConfig& cfg) {
  const TurningPoints tp = turning_points(w, L, cfg);
  if (degenerate(tp)) throw DegenerateOrbitError("circular orbit: the radial cycle collapses");
  Cycle cr{CycleLabel::radial,
           {{GeneratorKind::hamiltonian, radial_period(w, L, cfg)},
            {GeneratorKind::angular_momentum, -apsidal_angle(w, L, cfg)}}};
  Cycle cl{CycleLabel::angular, {{GeneratorKind::angular_momentum, 2.0 * kPi}}};
  return {cr, cl};
}

std::pair<Cycle, Cycle> build_cycles(double E, double L, const FieldConfig& cfg) {
  return build_cycles(excess_energy(E, cfg), L, cfg);
}

Cycle azimuthal_cycle() { return {CycleLabel::azimuthal, {{GeneratorKind::angular_momentum_z, 2.0 * kPi}}}; }

double return_distance(const PhasePoint& a, const PhasePoint& b) {
  const double dx = (a.x - b.x).norm() / std::max(a.x.norm(), std::numeric_limits<double>::min());
  const double dp = (a.p - b.p).norm() / std::max(a.p.norm(), std::numeric_limits<double>::min());
  return dx + dp;
}

namespace {

Generator make_generator(GeneratorKind kind, const FieldConfig& cfg) {
  switch (kind) {
    case GeneratorKind::hamiltonian: return hamiltonian_generator(cfg);
    case GeneratorKind::angular_momentum: return angular_momentum_generator();
    case GeneratorKind::angular_momentum_z: return angular_momentum_z_generator();
  }
  throw std::invalid_argument("unknown generator");
}

int sign_changes(const std::vector<PhasePoint>& pts, double (*component)(const PhasePoint&)) {
  int count = 0;
  double prev = 0.0;
  for (const auto& pt : pts) {
    const double v = component(pt);
    if (v == 0.0) continue;
    if (prev != 0.0 && (v > 0.0) != (prev > 0.0)) ++count;
    prev = v;
  }
  return count;
}

double radial_component(const PhasePoint& pt) { return pt.x.dot(pt.p); }

// Sign of p_theta, the momentum conjugate to the polar angle.
double polar_component(const PhasePoint& pt) {
  const Vec3& x = pt.x;
  const double rho2 = x.x() * x.x() + x.y() * x.y();
  return x.z() * (x.x() * pt.p.x() + x.y() * pt.p.y()) - rho2 * pt.p.z();
}

double azimuthal_component(const PhasePoint& pt) { return pt.x.x() * pt.p.y() - pt.x.y() * pt.p.x(); }

}  // namespace

CycleTransport transport_around(const Cycle& cycle, const SkewState& start, const FieldConfig& cfg,
                                double tol) {
  FlowOptions opt;
  opt.tolerance = tol;
  opt.detect_turning_points = false;

  CycleTransport out;
  out.end = start;
  out.rotor_samples.push_back(SpinRotor::identity());
  out.state_samples.push_back(start.pt);
  double action = 0.0;
  for (const auto& seg : cycle.segments) {
    const Generator gen = make_generator(seg.generator, cfg);
    const SkewTransport st = skew_flow(gen, out.end, seg.duration, opt);
    for (std::size_t k = 1; k < st.rotor_samples.size(); ++k) {
      out.rotor_samples.push_back(st.rotor_samples[k] * out.rotor);
      out.state_samples.push_back(st.state_samples[k]);
    }
    if (seg.generator == GeneratorKind::hamiltonian) {
      out.radial_sign_changes += sign_changes(st.state_samples, radial_component);
    }
    out.rotor = st.rotor * out.rotor;
    out.end = st.state;
    action += st.action;
  }
  out.action = action / (2.0 * kPi);
  out.return_distance = return_distance(out.end.pt, start.pt);
  return out;
}

int maslov_index(const Cycle& cycle, const TorusChart& chart, const FieldConfig& cfg, double tol) {
  const CycleTransport ct = transport_around(cycle, SkewState{torus_point(chart, cfg), Vec3::UnitZ()}, cfg, tol);
  switch (cycle.label) {
    case CycleLabel::radial: {
      const int count = sign_changes(ct.state_samples, radial_component);
      if (count == 0) throw DegenerateOrbitError("no radial turning point along the cycle");
      return count;
    }
    case CycleLabel::angular: {
      const Vec3 l = ct.state_samples.front().x.cross(ct.state_samples.front().p);
      if (std::hypot(l.x(), l.y()) <= 1e-12 * l.norm()) {
        throw DegenerateOrbitError("orbital plane is equatorial: polar turning points undefined");
      }
      return sign_changes(ct.state_samples, polar_component);
    }
    case CycleLabel::azimuthal: return sign_changes(ct.state_samples, azimuthal_component);
  }
  return 0;
}

int maslov_index(const Cycle& cycle, ExcessEnergy w, double L, const FieldConfig& cfg) {
  TorusChart chart;
  chart.w = w;
  chart.L = L;
  return maslov_index(cycle, chart, cfg);
}

double unwrapped_angle(const std::vector<SpinRotor>& rotors, const Vec3& axis) {
  const Vec3 a = axis.normalized();
  double total = 0.0;
  double prev = 0.0;
  bool first = true;
  for (const auto& d : rotors) {
    const double half = std::atan2(-d.vector().dot(a), d.scalar());
    if (first) {
      total = half;
      first = false;
    } else {
      total += std::remainder(half - prev, 2.0 * kPi);
    }
    prev = half;
  }
  return 2.0 * total;
}

SpinAngle spin_rotation_angle(const Cycle& cycle, const TorusChart& chart, const FieldConfig& cfg,
                              double tol) {
  const PhasePoint base = torus_point(chart, cfg);
  const Vec3 n = base.x.cross(base.p).normalized();
  const Vec3 axis = cycle.label == CycleLabel::azimuthal ? Vec3(Vec3::UnitZ()) : n;
  const CycleTransport ct = transport_around(cycle, SkewState{base, axis.unitOrthogonal()}, cfg, tol);

  SpinAngle out;
  out.rotor = ct.rotor;
  out.return_distance = ct.return_distance;
  out.latitude_drift = (su2_to_so3(ct.rotor) * n - n).norm();
  out.unwrapped = unwrapped_angle(ct.rotor_samples, axis);
  out.degenerate = (ct.rotor.quaternion() - Eigen::Vector4d(1.0, 0.0, 0.0, 0.0)).norm() < 1e-10;
  if (out.degenerate) {
    out.alpha = 0.0;
  } else {
    out.alpha = out.unwrapped - 4.0 * kPi * std::floor(out.unwrapped / (4.0 * kPi));
    if (out.alpha >= 4.0 * kPi) out.alpha = 0.0;
  }
  return out;
}

SpinAngle spin_rotation_angle(const Cycle& cycle, ExcessEnergy w, double L, const FieldConfig& cfg,
                              double tol) {
  TorusChart chart;
  chart.w = w;
  chart.L = L;
  return spin_rotation_angle(cycle, chart, cfg, tol);
}

}  // namespace spintorus
