#pragma once

// Bound orbits of central potentials: turning points, radial action, period,
// apsidal angle, fundamental cycles of the invariant torus, Maslov indices
// and spin rotation angles.

#include <string>
#include <utility>
#include <vector>

#include "spintorus/dynamics.hpp"
#include "spintorus/symbol.hpp"

namespace spintorus {

/// Energy measured from the rest energy, w = E - mc^2. Bound orbits live at
/// w of order alpha^2 mc^2, so carrying w instead of E keeps full precision
/// when c is large.
struct ExcessEnergy {
  double value = 0.0;
};

inline ExcessEnergy excess_energy(double total, const FieldConfig& cfg) {
  return {total - cfg.units.rest_energy()};
}
inline double total_energy(ExcessEnergy w, const FieldConfig& cfg) {
  return cfg.units.rest_energy() + w.value;
}

struct TurningPoints {
  double r_min;
  double r_max;
};

/// Radial momentum squared p_r^2 at radius r; clamped so that regions with
/// negative kinetic energy count as forbidden.
double radial_momentum_squared(ExcessEnergy w, double L, double r, const FieldConfig& cfg);

/// Effective potential U(r) = V(r) + sqrt(c^2 L^2 / r^2 + m^2 c^4) - mc^2; the
/// motion is allowed where w >= U.
double effective_potential(double L, double r, const FieldConfig& cfg);

struct CircularOrbit {
  ExcessEnergy energy;
  double radius;
};
/// Minimum of the effective potential (global over the search grid).
CircularOrbit circular_orbit(double L, const FieldConfig& cfg);

TurningPoints turning_points(ExcessEnergy w, double L, const FieldConfig& cfg);
TurningPoints turning_points(double E, double L, const FieldConfig& cfg);

/// (1/2pi) times the closed-loop integral of p_r dr.
double radial_action(ExcessEnergy w, double L, const FieldConfig& cfg);
double radial_action(double E, double L, const FieldConfig& cfg);

double radial_period(ExcessEnergy w, double L, const FieldConfig& cfg);
double radial_period(double E, double L, const FieldConfig& cfg);

/// Azimuth swept per radial period.
double apsidal_angle(ExcessEnergy w, double L, const FieldConfig& cfg);
double apsidal_angle(double E, double L, const FieldConfig& cfg);

struct OrbitParams {
  ExcessEnergy w;
  double E;
  double L;
  double r_min;
  double r_max;
  double I_r;
  double T_r;
  double dphi;
};
OrbitParams orbit_params(ExcessEnergy w, double L, const FieldConfig& cfg);

// ---------------------------------------------------------------------------
// Torus geometry

/// Coordinates of a point on the (w, L) torus. The orbital plane has normal
/// n with polar angle `inclination` and azimuth `node + pi/2`; `argument` is
/// the in-plane angle of x measured from the node line; `radial_phase` in
/// [0, 1) parametrises r = mid - half cos(2 pi phase) with p_r >= 0 on the
/// first half.
struct TorusChart {
  ExcessEnergy w;
  double L = 1.0;
  double inclination = 0.6;
  double node = 0.3;
  double argument = 0.2;
  double radial_phase = 0.25;
};

PhasePoint torus_point(const TorusChart& chart, const FieldConfig& cfg);

enum class GeneratorKind { hamiltonian, angular_momentum, angular_momentum_z };
std::string to_string(GeneratorKind kind);

struct CycleSegment {
  GeneratorKind generator;
  double duration;
};

/// C_r, C_L span the reduced torus; C_z is the azimuthal loop of the full
/// three-dimensional torus (used for magnetic sublevels).
enum class CycleLabel { radial, angular, azimuthal };
std::string to_string(CycleLabel label);

struct Cycle {
  CycleLabel label;
  std::vector<CycleSegment> segments;
};

/// (C_r, C_L). Throws DegenerateOrbitError for circular orbits.
std::pair<Cycle, Cycle> build_cycles(ExcessEnergy w, double L, const FieldConfig& cfg);
std::pair<Cycle, Cycle> build_cycles(double E, double L, const FieldConfig& cfg);
Cycle azimuthal_cycle();

struct CycleTransport {
  SkewState end;
  SpinRotor rotor;
  /// Cumulative transporter after every recorded sample.
  std::vector<SpinRotor> rotor_samples;
  std::vector<PhasePoint> state_samples;
  /// (1/2pi) times the loop integral of p.dx.
  double action = 0.0;
  double return_distance = 0.0;
  /// Number of sign changes of p_r along Hamiltonian segments.
  int radial_sign_changes = 0;
};

/// Skew-product flow of each segment in turn, starting from `start`.
CycleTransport transport_around(const Cycle& cycle, const SkewState& start, const FieldConfig& cfg,
                                double tol = 1e-11);

/// |dx|/|x| + |dp|/|p|.
double return_distance(const PhasePoint& a, const PhasePoint& b);

/// Counts caustic crossings: sign changes of p_r along C_r, of the polar
/// momentum p_theta along C_L and of p_phi along C_z.
int maslov_index(const Cycle& cycle, const TorusChart& chart, const FieldConfig& cfg,
                 double tol = 1e-11);
int maslov_index(const Cycle& cycle, ExcessEnergy w, double L, const FieldConfig& cfg);

struct SpinAngle {
  /// Net rotation about the invariant axis, in [0, 4 pi).
  double alpha = 0.0;
  /// Continuously tracked rotation angle before reduction.
  double unwrapped = 0.0;
  /// True when the transporter is the identity in SU(2), so no axis exists.
  bool degenerate = false;
  SpinRotor rotor;
  /// |R n - n|: bounds the latitude change of any spin around the loop.
  double latitude_drift = 0.0;
  double return_distance = 0.0;
};

/// Angle by which a spin frame is rotated about n = L/|L| (about e_z for
/// C_z) when transported around the cycle.
SpinAngle spin_rotation_angle(const Cycle& cycle, const TorusChart& chart, const FieldConfig& cfg,
                              double tol = 1e-11);
SpinAngle spin_rotation_angle(const Cycle& cycle, ExcessEnergy w, double L, const FieldConfig& cfg,
                              double tol = 1e-11);

/// Rotation angle of `rotors` about `axis`, unwrapped along the sequence.
double unwrapped_angle(const std::vector<SpinRotor>& rotors, const Vec3& axis);

}  // namespace spintorus
