#pragma once

// Subcommands of the spintorus tool. Each writes one artifact to `out`,
// diagnostics to `err`, and returns the process exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <spintorus/kepler.hpp>
#include <spintorus/quantize.hpp>
#include <spintorus/system_config.hpp>

namespace spintorus::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

enum class Format { json, csv, table };

std::string to_string(Format f);

/// Settings shared by every subcommand.
struct RunConfig {
  std::string subcommand;
  SystemConfig system;
  double tolerance = 1e-11;
  Format format = Format::json;
  std::uint64_t seed = 42;
  /// Not part of the hash: results do not depend on it.
  int threads = 1;
};

/// Metadata block embedded in every artifact. The hash covers the resolved
/// system, the shared settings and the command arguments.
nlohmann::json run_metadata(const RunConfig& run, const nlohmann::json& args);

struct LevelsArgs {
  Scheme scheme = Scheme::ebk_spin;
  int n_max = 2;
  std::optional<double> e_max;
  int twice_spin = 1;
  /// In units of mc^2.
  double group_tol = 1e-13;
};

struct CompareArgs {
  Scheme a = Scheme::sommerfeld_old;
  Scheme b = Scheme::ebk_spin;
  int n_max = 4;
};

struct TorusArgs {
  std::optional<double> energy;
  std::optional<double> excess_energy;
  double angmom = 1.5;
};

struct SpinAngleArgs {
  TorusArgs torus;
  CycleLabel cycle = CycleLabel::radial;
};

struct OrbitArgs {
  TorusArgs torus;
  double periods = 10.0;
  int samples_per_period = 100;
  std::vector<double> spin{0.0, 0.6, 0.8};
  /// Explicit initial condition; overrides the torus when both are set.
  std::vector<double> x;
  std::vector<double> p;
  std::optional<double> time;
};

struct IntegrabilityArgs {
  std::size_t points = 200;
  /// Range of |L| / hbar for the sampled tori.
  double l_min = 0.5;
  double l_max = 4.0;
  /// z component of a constant spin field added to the Hamiltonian member.
  double offset_bz = 0.0;
  std::size_t bundle_loops = 0;
  double theta = 1.5707963267948966;
};

int cmd_levels(const RunConfig& run, const LevelsArgs& args, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& run, const CompareArgs& args, std::ostream& out, std::ostream& err);
int cmd_spin_angle(const RunConfig& run, const SpinAngleArgs& args, std::ostream& out, std::ostream& err);
int cmd_orbit(const RunConfig& run, const OrbitArgs& args, std::ostream& out, std::ostream& err);
int cmd_check_integrability(const RunConfig& run, const IntegrabilityArgs& args, std::ostream& out,
                            std::ostream& err);

/// Parses argv (argv[0] is the program name) and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// Same, with the arguments after the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spintorus::cli
