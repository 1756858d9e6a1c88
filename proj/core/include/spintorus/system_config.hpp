#pragma once

// Declarative system definitions (JSON) resolved into FieldConfig.
//
// {
//   "potential": {"kind": "coulomb"}
//              | {"kind": "harmonic", "stiffness": 1e-4}
//              | {"kind": "custom-polynomial", "coefficients": {"-1": -0.0073, "2": 1e-8}},
//   "coupling": 0.0072973525693,
//   "units": {"mass": 1, "light_speed": 1, "hbar": 1, "charge": 0.0854}
// }
//
// Every key is optional. The charge defaults to sqrt(coupling * hbar * c);
// giving both charge and coupling is an error unless they agree. Unknown keys
// are rejected.

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "spintorus/symbol.hpp"

namespace spintorus {

struct SystemConfig {
  /// coulomb, harmonic or custom-polynomial.
  std::string kind = "coulomb";
  double coupling = kFineStructure;
  Units units = natural_units();
  double stiffness = 1.0;
  std::map<int, double> coefficients;

  FieldConfig field() const;
  /// Fully resolved form; equal systems give byte-identical dumps.
  nlohmann::json canonical() const;
};

/// Throws std::invalid_argument on schema violations.
SystemConfig parse_system_config(const nlohmann::json& j);
SystemConfig load_system_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace spintorus
