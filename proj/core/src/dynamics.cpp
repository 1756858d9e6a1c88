#include "spintorus/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>
#include <boost/numeric/odeint.hpp>

#include "spintorus/errors.hpp"

namespace spintorus {

// ---------------------------------------------------------------------------
// SU(2) rotors

SpinRotor::SpinRotor(const Eigen::Vector4d& q) : q_(q.normalized()) {}

SpinRotor SpinRotor::from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 a = axis.normalized();
  Eigen::Vector4d q;
  q[0] = std::cos(0.5 * angle);
  q.tail<3>() = -std::sin(0.5 * angle) * a;
  return SpinRotor(q, Raw{});
}

Eigen::Matrix2cd SpinRotor::matrix() const {
  using cd = std::complex<double>;
  const double w = q_[0], x = q_[1], y = q_[2], z = q_[3];
  Eigen::Matrix2cd d;
  d << cd(w, z), cd(y, x), cd(-y, x), cd(w, -z);
  return d;
}

SpinRotor SpinRotor::operator*(const SpinRotor& rhs) const {
  const double w1 = q_[0], w2 = rhs.q_[0];
  const Vec3 v1 = q_.tail<3>(), v2 = rhs.q_.tail<3>();
  Eigen::Vector4d q;
  q[0] = w1 * w2 - v1.dot(v2);
  q.tail<3>() = w1 * v2 + w2 * v1 - v1.cross(v2);
  return SpinRotor(q, Raw{});
}

SpinRotor SpinRotor::inverse() const {
  Eigen::Vector4d q = q_;
  q.tail<3>() *= -1.0;
  return SpinRotor(q, Raw{});
}

SpinRotor SpinRotor::operator-() const { return SpinRotor(Eigen::Vector4d(-q_), Raw{}); }

Mat3 su2_to_so3(const SpinRotor& d) {
  const auto& q = d.quaternion();
  // Hamilton convention uses the conjugate vector part.
  return Eigen::Quaterniond(q[0], -q[1], -q[2], -q[3]).normalized().toRotationMatrix();
}

Vec3 rotate(const Vec3& v, const Vec3& axis, double angle) {
  const Vec3 a = axis.normalized();
  const double c = std::cos(angle), s = std::sin(angle);
  return v * c + a.cross(v) * s + a * a.dot(v) * (1.0 - c);
}

// ---------------------------------------------------------------------------
// Integration engine shared by all flows: state (x, p, spin, action) with the
// spin carried either as a quaternion (4) or as a unit vector (3).

namespace {

namespace ode = boost::numeric::odeint;

struct PhaseVelocity {
  Vec3 x_dot;
  Vec3 p_dot;
};
using PhaseRhs = std::function<PhaseVelocity(const PhasePoint&)>;
using SpinFieldFn = std::function<Vec3(const PhasePoint&)>;

struct Scales {
  double length;
  double momentum;
};

template <std::size_t SpinDim>
struct Engine {
  static constexpr std::size_t N = 6 + SpinDim + 1;
  using State = std::array<double, N>;

  PhaseRhs phase;
  SpinFieldFn spin;
  State scale{};

  static PhasePoint point(const State& y) {
    PhasePoint pt;
    pt.x = Vec3(y[0], y[1], y[2]);
    pt.p = Vec3(y[3], y[4], y[5]);
    return pt;
  }

  State to_scaled(const State& y) const {
    State out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] / scale[i];
    return out;
  }
  State from_scaled(const State& y) const {
    State out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] * scale[i];
    return out;
  }

  // Works on scaled coordinates.
  void operator()(const State& ys, State& dys, double /*t*/) const {
    const State y = from_scaled(ys);
    const PhasePoint pt = point(y);
    const PhaseVelocity v = phase(pt);
    State dy{};
    for (int i = 0; i < 3; ++i) {
      dy[i] = v.x_dot[i];
      dy[3 + i] = v.p_dot[i];
    }
    const Vec3 c = spin ? spin(pt) : Vec3(Vec3::Zero());
    if constexpr (SpinDim == 4 || SpinDim == 7) {
      // d' = (0, -C/2) d in the rotor product.
      const double w = y[6];
      const Vec3 vec(y[7], y[8], y[9]);
      dy[6] = 0.5 * c.dot(vec);
      const Vec3 dv = -0.5 * w * c + 0.5 * c.cross(vec);
      dy[7] = dv[0];
      dy[8] = dv[1];
      dy[9] = dv[2];
      if constexpr (SpinDim == 7) {
        const Vec3 ds = c.cross(Vec3(y[10], y[11], y[12]));
        dy[10] = ds[0];
        dy[11] = ds[1];
        dy[12] = ds[2];
      }
    } else {
      const Vec3 s(y[6], y[7], y[8]);
      const Vec3 ds = c.cross(s);
      dy[6] = ds[0];
      dy[7] = ds[1];
      dy[8] = ds[2];
    }
    dy[N - 1] = pt.p.dot(v.x_dot);
    for (std::size_t i = 0; i < N; ++i) dys[i] = dy[i] / scale[i];
  }

  static void normalize_block(State& y, std::size_t first, std::size_t last) {
    double n2 = 0.0;
    for (std::size_t i = first; i < last; ++i) n2 += y[i] * y[i];
    const double n = std::sqrt(n2);
    for (std::size_t i = first; i < last; ++i) y[i] /= n;
  }

  static void normalize_spin(State& y) {
    if constexpr (SpinDim == 7) {
      normalize_block(y, 6, 10);
      normalize_block(y, 10, 13);
    } else {
      normalize_block(y, 6, 6 + SpinDim);
    }
  }
};

template <std::size_t SpinDim>
struct EngineOutput {
  using State = typename Engine<SpinDim>::State;
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> turning_times;
};

double radial_indicator(const PhasePoint& pt) { return pt.x.dot(pt.p); }

template <std::size_t SpinDim>
EngineOutput<SpinDim> run(Engine<SpinDim> eng, const typename Engine<SpinDim>::State& y0,
                          double t_final, const FlowOptions& opt, const Scales& scales,
                          double capture_radius) {
  using E = Engine<SpinDim>;
  using State = typename E::State;
  if (!(opt.tolerance > 0.0)) throw std::invalid_argument("integration tolerance must be positive");

  const PhasePoint p0 = E::point(y0);
  for (int i = 0; i < 3; ++i) {
    eng.scale[i] = scales.length;
    eng.scale[3 + i] = scales.momentum;
  }
  for (std::size_t i = 6; i < 6 + SpinDim; ++i) eng.scale[i] = 1.0;
  // A spin vector carried next to the rotor rides on the rotor's steps: the
  // huge (exact power of two) scale keeps it out of the error estimate.
  if constexpr (SpinDim == 7) {
    for (std::size_t i = 10; i < 13; ++i) eng.scale[i] = std::ldexp(1.0, 100);
  }
  eng.scale[E::N - 1] = scales.length * scales.momentum;

  EngineOutput<SpinDim> out;
  out.times.push_back(0.0);
  out.states.push_back(y0);
  if (t_final == 0.0) return out;
  if (!std::isfinite(t_final)) throw std::invalid_argument("flow duration must be finite");

  const double dir = t_final > 0.0 ? 1.0 : -1.0;
  const bool sampled = !opt.sample_times.empty();
  std::vector<double> samples;
  for (double t : opt.sample_times) {
    if (dir * t > 0.0 && dir * (t - t_final) < 0.0) samples.push_back(t);
  }

  // Initial step from the characteristic time of the motion.
  const PhaseVelocity v0 = eng.phase(p0);
  double tau = std::abs(t_final);
  if (v0.x_dot.norm() > 0.0) tau = std::min(tau, scales.length / v0.x_dot.norm());
  if (v0.p_dot.norm() > 0.0) tau = std::min(tau, scales.momentum / v0.p_dot.norm());
  const double dt0 = dir * std::min(std::abs(t_final), 1e-3 * tau);

  auto stepper = ode::make_dense_output(1e-2 * opt.tolerance, opt.tolerance, ode::runge_kutta_dopri5<State>());
  stepper.initialize(eng.to_scaled(y0), 0.0, dt0);

  auto unscaled_at = [&](double t) {
    State ys;
    stepper.calc_state(t, ys);
    State y = eng.from_scaled(ys);
    E::normalize_spin(y);
    return y;
  };

  double g_prev = radial_indicator(p0);
  std::size_t next = 0;
  for (std::size_t step = 0;; ++step) {
    if (step >= opt.max_steps) throw StiffnessError("step budget exhausted");
    std::pair<double, double> span;
    try {
      span = stepper.do_step(std::cref(eng));
    } catch (const DomainError&) {
      // A trial stage reached the singular core.
      if (capture_radius > 0.0) throw CaptureError("trajectory entered the capture radius");
      throw;
    }
    const auto [t0, t1] = span;
    const bool last = dir * (t1 - t_final) >= 0.0;
    const double t_end = last ? t_final : t1;

    if (opt.detect_turning_points) {
      const double g_end = radial_indicator(E::point(unscaled_at(t_end)));
      if (g_prev != 0.0 && g_end != 0.0 && (g_prev > 0.0) != (g_end > 0.0)) {
        double lo = t0, hi = t_end;
        const bool lo_positive = g_prev > 0.0;
        for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
          const double mid = 0.5 * (lo + hi);
          const double gm = radial_indicator(E::point(unscaled_at(mid)));
          if ((gm > 0.0) == lo_positive) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        out.turning_times.push_back(0.5 * (lo + hi));
      }
      g_prev = g_end;
    }

    while (next < samples.size() && dir * (samples[next] - t_end) <= 0.0) {
      out.times.push_back(samples[next]);
      out.states.push_back(unscaled_at(samples[next]));
      ++next;
    }

    if (last) {
      out.times.push_back(t_final);
      out.states.push_back(unscaled_at(t_final));
      break;
    }

    State y = eng.from_scaled(stepper.current_state());
    E::normalize_spin(y);
    const PhasePoint pt = E::point(y);
    if (capture_radius > 0.0 && pt.x.norm() < capture_radius) {
      throw CaptureError("trajectory entered the capture radius");
    }
    if (!std::isfinite(pt.x.squaredNorm() + pt.p.squaredNorm())) {
      throw StiffnessError("non-finite state during integration");
    }
    if (!sampled && opt.record_steps) {
      out.times.push_back(t1);
      out.states.push_back(y);
    }
    const double dt = stepper.current_time_step();
    if (std::abs(dt) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t1)) {
      throw StiffnessError("step size underflow");
    }
    stepper.initialize(eng.to_scaled(y), t1, dt);
  }
  return out;
}

Scales scales_for(const PhasePoint& init, double length_scale, double hbar) {
  Scales s;
  s.length = std::max(init.x.norm(), length_scale);
  s.momentum = init.p.norm() > 0.0 ? init.p.norm() : hbar / length_scale;
  return s;
}

template <std::size_t SpinDim>
typename Engine<SpinDim>::State pack(const PhasePoint& pt, const Eigen::Matrix<double, SpinDim, 1>& spin) {
  typename Engine<SpinDim>::State y{};
  for (int i = 0; i < 3; ++i) {
    y[i] = pt.x[i];
    y[3 + i] = pt.p[i];
  }
  for (std::size_t i = 0; i < SpinDim; ++i) y[6 + i] = spin[static_cast<int>(i)];
  y[6 + SpinDim] = 0.0;
  return y;
}

SpinRotor rotor_of(const Engine<4>::State& y) {
  return SpinRotor(Eigen::Vector4d(y[6], y[7], y[8], y[9]));
}

PhaseRhs hamilton_rhs(const FieldConfig& cfg, Branch branch) {
  return [&cfg, branch](const PhasePoint& pt) {
    const PhaseGradient g = hamiltonian_gradient(pt, cfg, branch);
    return PhaseVelocity{g.d_p, -g.d_x};
  };
}

PhaseGradient difference_gradient(const std::function<double(const PhasePoint&)>& f,
                                  const PhasePoint& pt) {
  static const double root = std::cbrt(std::numeric_limits<double>::epsilon());
  const double hx = root * std::max(pt.x.norm(), 1.0);
  const double hp = root * std::max(pt.p.norm(), std::numeric_limits<double>::min());
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

SkewTransport rigid_rotation(const SkewState& state, const Vec3& axis, double angle, double action_rate) {
  SkewTransport out;
  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(angle) / (std::numbers::pi / 8.0))));
  for (int k = 0; k <= pieces; ++k) {
    const double a = angle * k / pieces;
    PhasePoint pt{rotate(state.pt.p, axis, a), rotate(state.pt.x, axis, a)};
    out.rotor_samples.push_back(SpinRotor::from_axis_angle(axis, a));
    out.state_samples.push_back(pt);
  }
  out.rotor = out.rotor_samples.back();
  out.state.pt = out.state_samples.back();
  out.state.s = rotate(state.s, axis, angle);
  out.action = action_rate * angle;
  return out;
}

Vec3 angular_axis(const PhasePoint& pt) {
  const Vec3 l = pt.x.cross(pt.p);
  const double n = l.norm();
  if (n == 0.0) throw DomainError("angular momentum vanishes; rotation axis undefined");
  return l / n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public flows

Trajectory hamiltonian_flow(const PhasePoint& init, const FieldConfig& cfg, Branch branch,
                            double t_final, double tol) {
  FlowOptions opt;
  opt.tolerance = tol;
  return hamiltonian_flow(init, cfg, branch, t_final, opt);
}

Trajectory hamiltonian_flow(const PhasePoint& init, const FieldConfig& cfg, Branch branch,
                            double t_final, const FlowOptions& options) {
  cfg.validate();
  Engine<4> eng;
  eng.phase = hamilton_rhs(cfg, branch);
  if (branch == Branch::positive) {
    eng.spin = [&cfg](const PhasePoint& pt) { return precession_field(pt, cfg); };
  }
  const auto y0 = pack<4>(init, Eigen::Vector4d(1.0, 0.0, 0.0, 0.0));
  const auto raw = run<4>(eng, y0, t_final, options,
                          scales_for(init, cfg.length_scale, cfg.units.hbar), cfg.singular_radius);

  Trajectory traj;
  traj.branch = branch;
  traj.energy = classical_hamiltonian(init, cfg, branch);
  traj.times = raw.times;
  traj.turning_times = raw.turning_times;
  traj.tolerance = options.tolerance;
  traj.states.reserve(raw.states.size());
  traj.rotors.reserve(raw.states.size());
  traj.actions.reserve(raw.states.size());
  for (const auto& y : raw.states) {
    traj.states.push_back(Engine<4>::point(y));
    traj.rotors.push_back(rotor_of(y));
    traj.actions.push_back(y[10]);
  }
  return traj;
}

SpinRotor spin_transport(const Trajectory& traj) {
  if (traj.branch != Branch::positive) {
    throw std::invalid_argument("spin transport is defined on the positive-energy branch only");
  }
  if (traj.rotors.empty()) throw std::invalid_argument("empty trajectory");
  return traj.rotors.back();
}

SpinHistory precess_spin(const Trajectory& traj, const FieldConfig& cfg, const Vec3& s0) {
  if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
  if (std::abs(s0.norm() - 1.0) > 1e-12) throw std::invalid_argument("initial spin must be a unit vector");
  if (traj.branch != Branch::positive) {
    throw std::invalid_argument("spin precession is defined on the positive-energy branch only");
  }
  // Replays the integration that produced `traj`, so s(t) is driven by the
  // same discrete orbit.
  Engine<7> eng;
  eng.phase = hamilton_rhs(cfg, traj.branch);
  eng.spin = [&cfg](const PhasePoint& pt) { return precession_field(pt, cfg); };

  FlowOptions opt;
  opt.tolerance = traj.tolerance;
  opt.detect_turning_points = false;
  opt.sample_times = traj.times;
  const PhasePoint& init = traj.states.front();
  Eigen::Matrix<double, 7, 1> spin0;
  spin0 << 1.0, 0.0, 0.0, 0.0, s0[0], s0[1], s0[2];
  const auto raw = run<7>(eng, pack<7>(init, spin0), traj.times.back(), opt,
                          scales_for(init, cfg.length_scale, cfg.units.hbar), cfg.singular_radius);
  SpinHistory out;
  out.times = raw.times;
  for (const auto& y : raw.states) out.spins.emplace_back(y[10], y[11], y[12]);
  return out;
}

SkewState skew_step(const SkewState& state, const FieldConfig& cfg, double t, double tol) {
  FlowOptions opt;
  opt.tolerance = tol;
  opt.record_steps = false;
  opt.detect_turning_points = false;
  const Trajectory traj = hamiltonian_flow(state.pt, cfg, Branch::positive, t, opt);
  return {traj.states.back(), su2_to_so3(traj.rotors.back()) * state.s};
}

SkewTransport skew_flow(const Generator& gen, const SkewState& state, double t,
                        const FlowOptions& options) {
  if (gen.exact_flow) return gen.exact_flow(state, t);

  Engine<4> eng;
  if (gen.gradient) {
    eng.phase = [&gen](const PhasePoint& pt) {
      const PhaseGradient g = gen.gradient(pt);
      return PhaseVelocity{g.d_p, -g.d_x};
    };
  } else if (gen.value) {
    eng.phase = [&gen](const PhasePoint& pt) {
      const PhaseGradient g = difference_gradient(gen.value, pt);
      return PhaseVelocity{g.d_p, -g.d_x};
    };
  } else {
    throw std::invalid_argument("generator has neither a gradient, a value nor an exact flow");
  }
  eng.spin = gen.spin_field;

  const double length = std::max(state.pt.x.norm(), 1e-300);
  const Scales scales{length, state.pt.p.norm() > 0.0 ? state.pt.p.norm() : 1.0 / length};
  const auto raw = run<4>(eng, pack<4>(state.pt, Eigen::Vector4d(1.0, 0.0, 0.0, 0.0)), t, options,
                          scales, gen.capture_radius);
  SkewTransport out;
  for (const auto& y : raw.states) {
    out.rotor_samples.push_back(rotor_of(y));
    out.state_samples.push_back(Engine<4>::point(y));
  }
  out.rotor = out.rotor_samples.back();
  out.state.pt = out.state_samples.back();
  out.state.s = su2_to_so3(out.rotor) * state.s;
  out.action = raw.states.back()[10];
  return out;
}

Generator hamiltonian_generator(const FieldConfig& cfg) {
  Generator g;
  g.name = "H";
  g.value = [cfg](const PhasePoint& pt) { return classical_hamiltonian(pt, cfg, Branch::positive); };
  g.gradient = [cfg](const PhasePoint& pt) { return hamiltonian_gradient(pt, cfg, Branch::positive); };
  g.spin_field = [cfg](const PhasePoint& pt) { return precession_field(pt, cfg); };
  g.capture_radius = cfg.singular_radius;
  return g;
}

Generator angular_momentum_generator() {
  Generator g;
  g.name = "|L|";
  g.value = [](const PhasePoint& pt) { return pt.x.cross(pt.p).norm(); };
  g.gradient = [](const PhasePoint& pt) {
    const Vec3 n = angular_axis(pt);
    return PhaseGradient{n.cross(pt.x), pt.p.cross(n)};
  };
  g.spin_field = [](const PhasePoint& pt) { return angular_axis(pt); };
  g.exact_flow = [](const SkewState& s, double t) {
    return rigid_rotation(s, angular_axis(s.pt), t, s.pt.x.cross(s.pt.p).norm());
  };
  return g;
}

Generator angular_momentum_z_generator() {
  Generator g;
  g.name = "L_z";
  const Vec3 ez = Vec3::UnitZ();
  g.value = [ez](const PhasePoint& pt) { return ez.dot(pt.x.cross(pt.p)); };
  g.gradient = [ez](const PhasePoint& pt) { return PhaseGradient{ez.cross(pt.x), pt.p.cross(ez)}; };
  g.spin_field = [ez](const PhasePoint&) { return ez; };
  g.exact_flow = [ez](const SkewState& s, double t) {
    return rigid_rotation(s, ez, t, ez.dot(s.pt.x.cross(s.pt.p)));
  };
  return g;
}

}  // namespace spintorus
