#include "spintorus/integrability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "spintorus/errors.hpp"

namespace spintorus {

namespace {

constexpr double kPi = std::numbers::pi;

double scale_or(double norm, double fallback) { return norm > 0.0 ? norm : fallback; }

PhaseGradient central_gradient(const std::function<double(const PhasePoint&)>& f, const PhasePoint& pt,
                               double hx, double hp) {
  PhaseGradient g;
  for (int i = 0; i < 3; ++i) {
    PhasePoint a = pt, b = pt;
    a.x[i] += hx;
    b.x[i] -= hx;
    g.d_x[i] = (f(a) - f(b)) / (2.0 * hx);
    a = pt;
    b = pt;
    a.p[i] += hp;
    b.p[i] -= hp;
    g.d_p[i] = (f(a) - f(b)) / (2.0 * hp);
  }
  return g;
}

// Hamiltonian vector field of g: (xdot, pdot) = (dg/dp, -dg/dx).
struct Velocity {
  Vec3 x;
  Vec3 p;
};

Velocity hamiltonian_velocity(const PhaseGradient& g) { return {g.d_p, -g.d_x}; }

double relative_rate(const PhaseGradient& g, const PhasePoint& pt, const DifferenceScheme& scheme) {
  return g.d_p.norm() / scale_or(pt.x.norm(), scheme.length_scale) +
         g.d_x.norm() / scale_or(pt.p.norm(), scheme.momentum_scale);
}

// Derivative of V along the flow of g (componentwise bracket {V, g}).
Vec3 directional(const VectorField& v, const PhaseGradient& g, const PhasePoint& pt,
                 const DifferenceScheme& scheme) {
  const Velocity vel = hamiltonian_velocity(g);
  const double rate = relative_rate(g, pt, scheme);
  if (rate == 0.0) return Vec3::Zero();
  auto diff = [&](double h) {
    PhasePoint a = pt, b = pt;
    a.x += h * vel.x;
    a.p += h * vel.p;
    b.x -= h * vel.x;
    b.p -= h * vel.p;
    return Vec3((v(a) - v(b)) / (2.0 * h));
  };
  const double h = scheme.relative_step / rate;
  if (!scheme.richardson) return diff(h);
  return (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
}

}  // namespace

PhaseGradient phase_gradient(const PhaseFunction& f, const PhasePoint& pt, const DifferenceScheme& scheme) {
  if (f.gradient) return f.gradient(pt);
  if (!f.value) throw std::invalid_argument("phase function has neither value nor gradient");
  const double hx = scheme.relative_step * scale_or(pt.x.norm(), scheme.length_scale);
  const double hp = scheme.relative_step * scale_or(pt.p.norm(), scheme.momentum_scale);
  const PhaseGradient g1 = central_gradient(f.value, pt, hx, hp);
  if (!scheme.richardson) return g1;
  const PhaseGradient g2 = central_gradient(f.value, pt, 0.5 * hx, 0.5 * hp);
  return {(4.0 * g2.d_p - g1.d_p) / 3.0, (4.0 * g2.d_x - g1.d_x) / 3.0};
}

double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g, const PhasePoint& pt,
                       const DifferenceScheme& scheme) {
  const PhaseGradient a = phase_gradient(f, pt, scheme);
  const PhaseGradient b = phase_gradient(g, pt, scheme);
  return a.d_x.dot(b.d_p) - a.d_p.dot(b.d_x);
}

Vec3 poisson_bracket(const VectorField& f, const PhaseFunction& g, const PhasePoint& pt,
                     const DifferenceScheme& scheme) {
  return directional(f, phase_gradient(g, pt, scheme), pt, scheme);
}

Vec3 poisson_bracket(const PhaseFunction& f, const VectorField& g, const PhasePoint& pt,
                     const DifferenceScheme& scheme) {
  return -poisson_bracket(g, f, pt, scheme);
}

void GeneratorSet::validate() const {
  if (A.size() != C.size()) throw std::invalid_argument("generator set: A and C differ in length");
  if (!names.empty() && names.size() != A.size()) {
    throw std::invalid_argument("generator set: names and A differ in length");
  }
}

Vec3 involution_residual(const GeneratorSet& gens, std::size_t j, std::size_t k, const PhasePoint& pt,
                         const DifferenceScheme& scheme) {
  gens.validate();
  if (j >= gens.size() || k >= gens.size()) throw std::out_of_range("generator index");
  const Vec3 cj = gens.C[j](pt);
  const Vec3 ck = gens.C[k](pt);
  return poisson_bracket(gens.C[k], gens.A[j], pt, scheme) + poisson_bracket(gens.A[k], gens.C[j], pt, scheme) -
         cj.cross(ck);
}

double normalized_residual(const GeneratorSet& gens, std::size_t j, std::size_t k, const PhasePoint& pt,
                           const DifferenceScheme& scheme) {
  const Vec3 r = involution_residual(gens, j, k, pt, scheme);
  const double nj = gens.C[j](pt).norm();
  const double nk = gens.C[k](pt).norm();
  const double rj = relative_rate(phase_gradient(gens.A[j], pt, scheme), pt, scheme);
  const double rk = relative_rate(phase_gradient(gens.A[k], pt, scheme), pt, scheme);
  const double s = nk * rj + nj * rk + nj * nk;
  if (s == 0.0) return r.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return r.norm() / s;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::integrable: return "integrable";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::not_integrable: return "not integrable";
  }
  return "?";
}

Verdict classify_residual(double r) {
  if (r <= 1e-6) return Verdict::integrable;
  if (r <= 1e-3) return Verdict::inconclusive;
  return Verdict::not_integrable;
}

IntegrabilityReport check_integrability(const GeneratorSet& gens, const PointSampler& sampler,
                                        std::size_t points, std::uint64_t seed,
                                        const DifferenceScheme& scheme) {
  gens.validate();
  std::mt19937_64 rng(seed);
  IntegrabilityReport rep;
  rep.seed = seed;
  rep.points = points;

  DifferenceScheme coarse = scheme;
  coarse.richardson = false;
  coarse.relative_step = 1e-3;
  DifferenceScheme finer = coarse;
  finer.relative_step = 0.5 * coarse.relative_step;
  double sum_coarse = 0.0, sum_fine = 0.0;

  for (std::size_t n = 0; n < points; ++n) {
    const PhasePoint pt = sampler(rng);
    for (std::size_t j = 0; j < gens.size(); ++j) {
      for (std::size_t k = j + 1; k < gens.size(); ++k) {
        rep.max_residual = std::max(rep.max_residual, normalized_residual(gens, j, k, pt, scheme));
        sum_coarse += normalized_residual(gens, j, k, pt, coarse);
        sum_fine += normalized_residual(gens, j, k, pt, finer);

        const PhaseGradient gj = phase_gradient(gens.A[j], pt, scheme);
        const PhaseGradient gk = phase_gradient(gens.A[k], pt, scheme);
        const double norm = gj.d_x.norm() * gk.d_p.norm() + gj.d_p.norm() * gk.d_x.norm();
        if (norm > 0.0) {
          rep.max_bracket = std::max(rep.max_bracket, std::abs(gj.d_x.dot(gk.d_p) - gj.d_p.dot(gk.d_x)) / norm);
        }
      }
    }
  }
  rep.verdict = classify_residual(rep.max_residual);
  rep.convergence_order = (sum_fine > 0.0 && sum_coarse > 0.0) ? std::log2(sum_coarse / sum_fine) : 0.0;
  return rep;
}

GeneratorSet kepler_generator_set(const FieldConfig& cfg, const Vec3& offset) {
  const Generator h = hamiltonian_generator(cfg);
  const Generator l = angular_momentum_generator();
  const Generator lz = angular_momentum_z_generator();
  GeneratorSet gens;
  gens.names = {h.name, l.name, lz.name};
  gens.A = {{h.value, h.gradient}, {l.value, l.gradient}, {lz.value, lz.gradient}};
  const auto field = h.spin_field;
  gens.C = {[field, offset](const PhasePoint& pt) { return Vec3(field(pt) + offset); }, l.spin_field,
            lz.spin_field};
  return gens;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

PointSampler kepler_bound_sampler(const FieldConfig& cfg, double L_min, double L_max) {
  if (!(L_min > 0.0 && L_max >= L_min)) throw std::invalid_argument("invalid angular momentum range");
  return [cfg, L_min, L_max](std::mt19937_64& rng) {
    TorusChart chart;
    chart.L = L_min + (L_max - L_min) * uniform01(rng);
    const ExcessEnergy wc = circular_orbit(chart.L, cfg).energy;
    chart.w = ExcessEnergy{wc.value * (0.05 + 0.9 * uniform01(rng))};
    chart.inclination = std::acos(0.9 * (2.0 * uniform01(rng) - 1.0));
    chart.node = 2.0 * kPi * uniform01(rng);
    chart.argument = 2.0 * kPi * uniform01(rng);
    chart.radial_phase = uniform01(rng);
    return torus_point(chart, cfg);
  };
}

namespace {

FlowOptions plain_options(double tol) {
  FlowOptions opt;
  opt.tolerance = tol;
  opt.record_steps = false;
  opt.detect_turning_points = false;
  return opt;
}

double state_distance(const SkewState& a, const SkewState& b) {
  return return_distance(a.pt, b.pt) + (a.s - b.s).norm();
}

}  // namespace

double commutation_defect(const Generator& a, const Generator& b, const SkewState& state, double t,
                          double s, double tol) {
  const FlowOptions opt = plain_options(tol);
  const SkewState ab = skew_flow(a, skew_flow(b, state, s, opt).state, t, opt).state;
  const SkewState ba = skew_flow(b, skew_flow(a, state, t, opt).state, s, opt).state;
  return state_distance(ab, ba);
}

BundleReport check_bundle_geometry(ExcessEnergy w, double L, double theta, const FieldConfig& cfg,
                                   std::size_t n_loops, const BundleOptions& options) {
  if (!(theta >= 0.0 && theta <= kPi)) throw std::invalid_argument("latitude must lie in [0, pi]");
  const double period = radial_period(w, L, cfg);
  const double dphi = apsidal_angle(w, L, cfg);

  Generator h = hamiltonian_generator(cfg);
  if (options.spin_field_offset.squaredNorm() > 0.0) {
    const auto field = h.spin_field;
    const Vec3 offset = options.spin_field_offset;
    h.spin_field = [field, offset](const PhasePoint& pt) { return Vec3(field(pt) + offset); };
  }
  const std::array<Generator, 3> gens{h, angular_momentum_generator(), angular_momentum_z_generator()};
  const FlowOptions opt = plain_options(options.tol);

  std::mt19937_64 rng(options.seed);
  BundleReport rep;
  rep.seed = options.seed;
  rep.loops = n_loops;
  for (std::size_t loop = 0; loop < n_loops; ++loop) {
    TorusChart chart;
    chart.w = w;
    chart.L = L;
    chart.inclination = std::acos(0.9 * (2.0 * uniform01(rng) - 1.0));
    chart.node = 2.0 * kPi * uniform01(rng);
    chart.argument = 2.0 * kPi * uniform01(rng);
    chart.radial_phase = uniform01(rng);
    const PhasePoint base = torus_point(chart, cfg);
    const Vec3 n = base.x.cross(base.p).normalized();
    const Vec3 u = n.unitOrthogonal();
    const double az = 2.0 * kPi * uniform01(rng);
    const Vec3 e = std::cos(az) * u + std::sin(az) * n.cross(u);
    SkewState state{base, std::cos(theta) * n + std::sin(theta) * e};

    // Closed word: k_r C_r + k_L C_L + k_z C_z, each total cut in two and shuffled.
    const int kr = uniform01(rng) < 0.5 ? -1 : 1;
    const int kl = static_cast<int>(std::floor(3.0 * uniform01(rng))) - 1;
    const int kz = static_cast<int>(std::floor(3.0 * uniform01(rng))) - 1;
    const std::array<double, 3> totals{kr * period, -kr * dphi + kl * 2.0 * kPi, kz * 2.0 * kPi};
    std::vector<std::pair<std::size_t, double>> pieces;
    for (std::size_t g = 0; g < 3; ++g) {
      if (totals[g] == 0.0) continue;
      const double f = 0.2 + 0.6 * uniform01(rng);
      pieces.emplace_back(g, f * totals[g]);
      pieces.emplace_back(g, (1.0 - f) * totals[g]);
    }
    for (std::size_t i = pieces.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(std::floor(uniform01(rng) * static_cast<double>(i)));
      std::swap(pieces[i - 1], pieces[std::min(j, i - 1)]);
    }
    for (const auto& [g, t] : pieces) state = skew_flow(gens[g], state, t, opt).state;

    const Vec3 n_end = state.pt.x.cross(state.pt.p).normalized();
    const double lat = std::atan2(state.s.cross(n_end).norm(), state.s.dot(n_end));
    rep.max_deviation = std::max(rep.max_deviation, std::abs(lat - theta));
    rep.max_return_distance = std::max(rep.max_return_distance, return_distance(state.pt, base));
  }
  rep.passed = rep.max_deviation <= 1e-7;
  return rep;
}

}  // namespace spintorus
