#include "spintorus/trajectory_io.hpp"

#include <cmath>

#include "spintorus/errors.hpp"

namespace spintorus {

std::vector<OrbitSample> orbit_samples(const Trajectory& traj, const FieldConfig& cfg, const Vec3& s0) {
  if (traj.states.empty()) return {};
  if (traj.rotors.size() != traj.states.size()) {
    throw DomainError("trajectory carries no spin transporters");
  }
  const double e0 = classical_hamiltonian(traj.states.front(), cfg, traj.branch);
  const double scale = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
  std::vector<OrbitSample> out;
  out.reserve(traj.states.size());
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double e = classical_hamiltonian(traj.states[k], cfg, traj.branch);
    out.push_back({traj.times[k], traj.states[k], su2_to_so3(traj.rotors[k]) * s0, (e - e0) / scale});
  }
  return out;
}

std::string format_number(double v) {
  // nlohmann's serializer emits the shortest representation that round-trips.
  return nlohmann::json(v).dump();
}

void write_orbit_csv(std::ostream& out, const std::vector<OrbitSample>& samples,
                     const std::vector<std::string>& header) {
  for (const auto& line : header) out << "# " << line << '\n';
  out << "t,x1,x2,x3,p1,p2,p3,s1,s2,s3,energy_drift\n";
  for (const auto& s : samples) {
    out << format_number(s.t);
    for (int i = 0; i < 3; ++i) out << ',' << format_number(s.pt.x[i]);
    for (int i = 0; i < 3; ++i) out << ',' << format_number(s.pt.p[i]);
    for (int i = 0; i < 3; ++i) out << ',' << format_number(s.s[i]);
    out << ',' << format_number(s.energy_drift) << '\n';
  }
}

nlohmann::json orbit_to_json(const std::vector<OrbitSample>& samples) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : samples) {
    arr.push_back({{"t", s.t},
                   {"x", {s.pt.x[0], s.pt.x[1], s.pt.x[2]}},
                   {"p", {s.pt.p[0], s.pt.p[1], s.pt.p[2]}},
                   {"s", {s.s[0], s.s[1], s.s[2]}},
                   {"energy_drift", s.energy_drift}});
  }
  return arr;
}

}  // namespace spintorus
