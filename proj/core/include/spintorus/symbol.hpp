#pragma once

// Matrix-valued Dirac symbol, its scalar eigenvalue Hamiltonians, eigenframes
// and the spin precession field for configurable electromagnetic potentials.

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "spintorus/types.hpp"

namespace spintorus {

/// CODATA value used as default coupling in natural units.
inline constexpr double kFineStructure = 1.0 / 137.035999;

struct Units {
  double mass = 1.0;
  double light_speed = 1.0;
  double hbar = 1.0;
  double charge = 1.0;

  double rest_energy() const { return mass * light_speed * light_speed; }
  /// Dimensionless coupling e^2 / (hbar c).
  double coupling() const { return charge * charge / (hbar * light_speed); }
};

/// hbar = c = m = 1 with e^2 = alpha.
Units natural_units(double alpha = kFineStructure);

/// Radial profile V(r) = e*phi(r) of a central potential.
struct RadialProfile {
  std::string kind;
  std::function<double(double)> potential_energy;
  std::function<double(double)> derivative;
  /// k in V(r) ~ -k/r as r -> 0; zero for potentials regular at the origin.
  double coulomb_strength = 0.0;
};

/// Electromagnetic configuration together with the particle's constants.
///
/// `phi` is mandatory. Gradients and the vector potential are optional; when
/// an analytic gradient or Jacobian is missing, central differences with step
/// cbrt(eps) * max(|x|, length_scale / 1000) are used instead.
struct FieldConfig {
  Units units;
  std::function<double(const Vec3&)> phi;
  std::function<Vec3(const Vec3&)> grad_phi;
  std::function<Vec3(const Vec3&)> vector_potential;
  /// J(i, j) = dA_i / dx_j.
  std::function<Mat3(const Vec3&)> vector_potential_jacobian;
  /// Present iff phi depends on |x| only and A vanishes.
  std::optional<RadialProfile> central;
  /// Points closer than this to the origin are outside the domain.
  double singular_radius = 0.0;
  /// Characteristic length (Bohr radius, oscillator length, ...).
  double length_scale = 1.0;

  /// Throws std::invalid_argument unless m, c, hbar, e > 0 and phi is set.
  void validate() const;
};

FieldConfig coulomb_field(const Units& units = natural_units());
/// V(r) = stiffness * r^2 / 2.
FieldConfig harmonic_field(double stiffness, const Units& units = natural_units());
/// V(r) = sum_k c_k r^k; negative powers make the origin singular.
FieldConfig polynomial_field(const std::map<int, double>& coefficients,
                             const Units& units = natural_units());
/// Adds A = B x x / 2 (uniform magnetic field B); drops the central tag.
FieldConfig with_uniform_magnetic_field(FieldConfig cfg, const Vec3& b_field);

Vec3 electric_field(const FieldConfig& cfg, const Vec3& x);
Vec3 magnetic_field(const FieldConfig& cfg, const Vec3& x);
Vec3 vector_potential(const FieldConfig& cfg, const Vec3& x);

/// Largest mismatch between supplied analytic derivatives and central
/// differences of the supplied potentials. Zero where nothing is supplied.
struct FieldConsistency {
  double gradient_mismatch = 0.0;
  double curl_mismatch = 0.0;
};
FieldConsistency check_field_consistency(const FieldConfig& cfg, const Vec3& x);

/// Kinetic momentum p - (e/c) A(x).
Vec3 kinetic_momentum(const PhasePoint& pt, const FieldConfig& cfg);
/// epsilon = sqrt((c p - e A)^2 + m^2 c^4).
double kinetic_energy(const PhasePoint& pt, const FieldConfig& cfg);

using DiracMatrix = Eigen::Matrix4cd;
using EigenBasis = Eigen::Matrix<std::complex<double>, 4, 2>;

/// c alpha.(p - e A / c) + beta m c^2 + e phi in the standard representation.
DiracMatrix dirac_symbol(const PhasePoint& pt, const FieldConfig& cfg);

struct HamiltonianPair {
  double h_plus;
  double h_minus;
};
HamiltonianPair classical_hamiltonians(const PhasePoint& pt, const FieldConfig& cfg);
double classical_hamiltonian(const PhasePoint& pt, const FieldConfig& cfg, Branch branch);
PhaseGradient hamiltonian_gradient(const PhasePoint& pt, const FieldConfig& cfg, Branch branch);

struct EigenFrame {
  double h_plus;
  double h_minus;
  EigenBasis v_plus;
  EigenBasis v_minus;
};

/// Orthonormal bases of the two doubly degenerate eigenspaces. The gauge is
/// fixed by projecting the standard basis and orthonormalising greedily, so
/// the same point always yields the same frame.
EigenFrame eigen_split(const PhasePoint& pt, const FieldConfig& cfg);

/// Field C(p, x) driving the classical spin precession ds/dt = C x s on the
/// positive-energy branch.
Vec3 precession_field(const PhasePoint& pt, const FieldConfig& cfg);

}  // namespace spintorus
