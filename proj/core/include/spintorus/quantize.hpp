#pragma once

// Generalised EBK quantization with spin corrections, closed-form
// fine-structure energies, level enumeration, degeneracies and scheme
// comparison.

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spintorus/kepler.hpp"
#include "spintorus/symbol.hpp"

namespace spintorus {

/// sommerfeld-old: I_r = hbar n_r, L = hbar l.
/// ebk-noswitch:   Maslov terms only (spinless EBK).
/// ebk-spin:       Maslov and spin terms, both measured on the torus.
/// dirac-exact:    Kepler corrections (2, 2, 2pi, 2pi) and the closed form.
enum class Scheme { sommerfeld_old, ebk_noswitch, ebk_spin, dirac_exact };

std::string to_string(Scheme s);
/// Throws std::invalid_argument for unknown names.
Scheme parse_scheme(const std::string& name);

struct QuantumNumbers {
  int n_r = 0;
  int l = 0;
  /// 2 m_s, in {-2s, -2s + 2, ..., 2s}.
  int twice_m_s = 0;
  /// 2 s; spin 1/2 by default.
  int twice_spin = 1;

  double m_s() const { return 0.5 * twice_m_s; }
  double spin() const { return 0.5 * twice_spin; }
  bool operator==(const QuantumNumbers&) const = default;
};

std::string to_string(const QuantumNumbers& qn);

struct Corrections {
  double mu_r = 0.0;
  double mu_L = 0.0;
  double alpha_r = 0.0;
  double alpha_L = 0.0;
};

/// Values the scheme starts from (and keeps, except for ebk-spin).
Corrections nominal_corrections(Scheme s);

struct ActionPair {
  double I_r;
  double L;
};

/// I_r = hbar (n_r + mu_r/4 + m_s alpha_r / 2pi), L likewise. Throws
/// NoBoundStateError when L is not above the fall-to-centre bound or I_r < 0.
ActionPair quantized_actions(const QuantumNumbers& qn, const Corrections& corr, const FieldConfig& cfg);

/// Valid n_r, l, m_s and, with the scheme's nominal corrections, I_r >= 0 and
/// L > 0. For spin 1/2 under ebk-spin this is l >= 1/2 -+ 1/2.
bool is_admissible(const QuantumNumbers& qn, Scheme s);

/// Sommerfeld fine-structure formula E(I_r, L). Throws NoBoundStateError for
/// L/hbar <= alpha.
double exact_energy(double I_r_over_hbar, double L_over_hbar, const FieldConfig& cfg);
/// Same formula for E - mc^2 without cancellation.
ExcessEnergy exact_excess_energy(double I_r_over_hbar, double L_over_hbar, const FieldConfig& cfg);

struct LevelRecord {
  QuantumNumbers qn;
  Scheme scheme = Scheme::ebk_spin;
  double E = 0.0;
  ExcessEnergy w;
  double I_r = 0.0;
  double L = 0.0;
  Corrections corrections;
  /// (I_r + L) / hbar.
  double principal = 0.0;
  /// Number of magnetic sublevels on this torus.
  int multiplicity = 0;
  int iterations = 0;
};

struct SolveOptions {
  /// Relative tolerance of the energy root (in E - mc^2).
  double energy_tol = 1e-13;
  /// Integrator tolerance for transport around cycles.
  double transport_tol = 1e-11;
  int max_iterations = 8;
  /// Radial action of the probe torus used when the quantized torus is
  /// circular (I_r = 0), in units of hbar.
  double probe_action = 0.05;
};

/// Energy w with radial_action(w, L) = I_r by bracketing and TOMS 748.
ExcessEnergy solve_energy(double I_r, double L, const FieldConfig& cfg, double rel_tol = 1e-13);

/// Maslov indices and spin angles measured on the (I_r, L) torus, or on a
/// probe torus with the same L when I_r is (nearly) zero.
Corrections measure_corrections(double I_r, double L, const FieldConfig& cfg, const SolveOptions& opt = {});

LevelRecord solve_level(const QuantumNumbers& qn, const FieldConfig& cfg, Scheme scheme,
                        const SolveOptions& opt = {});

/// #{m in Z : |m + m_s alpha_z / 2pi + mu_z / 4| < L / hbar}.
int magnetic_multiplicity(double L_over_hbar, double m_s, double alpha_z = 2.0 * std::numbers::pi,
                          double mu_z = 0.0);

/// Admissible tuples with nominal principal index (I_r + L)/hbar <= n_max,
/// ordered by (principal, m_s, l, n_r).
std::vector<QuantumNumbers> admissible_states(int n_max, Scheme scheme, int twice_spin = 1);

struct LevelFailure {
  QuantumNumbers qn;
  std::string message;
};

struct Spectrum {
  std::vector<LevelRecord> levels;
  std::vector<LevelFailure> failures;
};

struct EnumerateOptions {
  SolveOptions solve;
  int twice_spin = 1;
  /// Worker threads; output order does not depend on it.
  int threads = 1;
};

Spectrum enumerate_levels(int n_max, const FieldConfig& cfg, Scheme scheme, const EnumerateOptions& opt = {});
/// All admissible levels with E <= E_max (E_max < mc^2).
Spectrum enumerate_spectrum(double E_max, const FieldConfig& cfg, Scheme scheme, const EnumerateOptions& opt = {});

struct LevelGroup {
  double E;
  ExcessEnergy w;
  int degeneracy;
  std::vector<std::size_t> members;
};

/// Groups levels whose energies differ by at most tol * mc^2 (sorted by E).
std::vector<LevelGroup> group_levels(const std::vector<LevelRecord>& levels, const FieldConfig& cfg,
                                     double tol = 1e-13);

struct ComparisonRow {
  double I_r;
  double L;
  LevelRecord a;
  LevelRecord b;
  /// |E_a - E_b| / mc^2.
  double delta;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  double max_delta = 0.0;
  std::size_t unmatched = 0;
};

/// Matches levels of two spectra by their nominal quantized actions.
Comparison compare_spectra(const Spectrum& a, const Spectrum& b, const FieldConfig& cfg);

}  // namespace spintorus
