#pragma once

// Export of sampled orbits (position, momentum, spin, energy drift).

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spintorus/dynamics.hpp"

namespace spintorus {

struct OrbitSample {
  double t;
  PhasePoint pt;
  Vec3 s;
  /// (H - H(0)) / |H(0)|.
  double energy_drift;
};

/// Spin s_k = R(d_k) s0 from the transporters stored on the trajectory.
std::vector<OrbitSample> orbit_samples(const Trajectory& traj, const FieldConfig& cfg, const Vec3& s0);

/// Columns t,x1,x2,x3,p1,p2,p3,s1,s2,s3,energy_drift; each header line is
/// written as a '#' comment first.
void write_orbit_csv(std::ostream& out, const std::vector<OrbitSample>& samples,
                     const std::vector<std::string>& header = {});

nlohmann::json orbit_to_json(const std::vector<OrbitSample>& samples);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace spintorus
