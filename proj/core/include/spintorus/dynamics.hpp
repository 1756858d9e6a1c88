#pragma once

// Hamiltonian flows, SU(2) spin transport, SO(3) spin precession and the
// skew-product flows built from them.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spintorus/symbol.hpp"
#include "spintorus/types.hpp"

namespace spintorus {

/// Element of SU(2) stored as a unit quaternion q = (w, x, y, z) with
/// d = w 1 + i (x sigma_x + y sigma_y + z sigma_z). Under this identification
/// a rotation by angle theta about the unit axis n is (cos theta/2, -sin theta/2 n).
class SpinRotor {
 public:
  SpinRotor() : q_(1.0, 0.0, 0.0, 0.0) {}
  /// Normalises the input.
  explicit SpinRotor(const Eigen::Vector4d& q);

  static SpinRotor identity() { return SpinRotor(); }
  static SpinRotor from_axis_angle(const Vec3& axis, double angle);

  const Eigen::Vector4d& quaternion() const { return q_; }
  double scalar() const { return q_[0]; }
  Vec3 vector() const { return q_.tail<3>(); }
  double norm() const { return q_.norm(); }

  /// The 2x2 unitary matrix d.
  Eigen::Matrix2cd matrix() const;

  /// Matrix product: (a * b) acts as b first, then a.
  SpinRotor operator*(const SpinRotor& rhs) const;
  SpinRotor inverse() const;
  SpinRotor operator-() const;

 private:
  struct Raw {};
  SpinRotor(const Eigen::Vector4d& q, Raw) : q_(q) {}
  Eigen::Vector4d q_;
};

/// Covering map SU(2) -> SO(3): d (sigma.s) d^dagger = sigma.(R s).
Mat3 su2_to_so3(const SpinRotor& d);

/// Point of the extended phase space R^6 x S^2.
struct SkewState {
  PhasePoint pt;
  Vec3 s = Vec3::UnitZ();
};

struct FlowOptions {
  double tolerance = 1e-10;
  /// When non-empty, samples are recorded at these times (same sign as the
  /// flow duration, monotone) instead of at every accepted step.
  std::vector<double> sample_times;
  /// Record every accepted step (ignored when sample_times is set). When
  /// false only the endpoints are kept.
  bool record_steps = true;
  bool detect_turning_points = true;
  std::size_t max_steps = 5'000'000;
};

/// Sampled solution of Hamilton's equations together with the spin
/// transporter d(t) and the accumulated action integral of p.dx.
struct Trajectory {
  Branch branch = Branch::positive;
  double energy = 0.0;
  std::vector<double> times;
  std::vector<PhasePoint> states;
  std::vector<SpinRotor> rotors;
  std::vector<double> actions;
  /// Times at which the radial momentum x.p / |x| changes sign.
  std::vector<double> turning_times;
  /// Integrator tolerance the trajectory was computed with.
  double tolerance = 1e-10;
};

Trajectory hamiltonian_flow(const PhasePoint& init, const FieldConfig& cfg, Branch branch,
                            double t_final, double tol);
Trajectory hamiltonian_flow(const PhasePoint& init, const FieldConfig& cfg, Branch branch,
                            double t_final, const FlowOptions& options);

/// Spin transporter d(t_final) accumulated along the trajectory. Throws for the
/// negative branch, on which no spin transport is carried.
SpinRotor spin_transport(const Trajectory& traj);

struct SpinHistory {
  std::vector<double> times;
  std::vector<Vec3> spins;
};

/// Integrates ds/dt = C x s directly (SO(3) route) along `traj`, sampled at
/// `traj.times`. The orbit is re-integrated on the same steps as the original
/// flow, at the trajectory's tolerance.
SpinHistory precess_spin(const Trajectory& traj, const FieldConfig& cfg, const Vec3& s0);

/// Physical skew product Y^t on R^6 x S^2.
SkewState skew_step(const SkewState& state, const FieldConfig& cfg, double t, double tol = 1e-10);

/// Result of transporting a state along a generator's skew product.
struct SkewTransport {
  SkewState state;
  SpinRotor rotor;
  /// Integral of p.dx along the phase-space path.
  double action = 0.0;
  /// Intermediate transporters (including the start and end) used for
  /// continuous winding bookkeeping.
  std::vector<SpinRotor> rotor_samples;
  std::vector<PhasePoint> state_samples;
};

/// A scalar phase-space function A together with the spin field C it is
/// extended by. Either `gradient` or `exact_flow` must be usable; when
/// `gradient` is empty it is replaced by central differences.
struct Generator {
  std::string name;
  std::function<double(const PhasePoint&)> value;
  std::function<PhaseGradient(const PhasePoint&)> gradient;
  std::function<Vec3(const PhasePoint&)> spin_field;
  std::function<SkewTransport(const SkewState&, double)> exact_flow;
  /// Radius inside which numerical flows abort with CaptureError.
  double capture_radius = 0.0;
};

SkewTransport skew_flow(const Generator& gen, const SkewState& state, double t,
                        const FlowOptions& options = {});

/// A_1 = H^+ with the physical precession field.
Generator hamiltonian_generator(const FieldConfig& cfg);
/// |L| with spin field L/|L|: rigid rotation of (x, p, s) about the L axis.
Generator angular_momentum_generator();
/// L_z with spin field e_z: rigid rotation of (x, p, s) about the z axis.
Generator angular_momentum_z_generator();

/// Rotation about `axis` by `angle` applied to a vector.
Vec3 rotate(const Vec3& v, const Vec3& axis, double angle);

}  // namespace spintorus
