#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <spintorus/system_config.hpp>
#include <spintorus/trajectory_io.hpp>

#include "oracles.hpp"

using namespace spintorus;

TEST(SystemConfig, DefaultsAreNaturalCoulomb) {
  const SystemConfig s = parse_system_config(nlohmann::json::object());
  EXPECT_EQ(s.kind, "coulomb");
  EXPECT_DOUBLE_EQ(s.coupling, oracle::alpha_default);
  EXPECT_NEAR(s.units.charge * s.units.charge, oracle::alpha_default, 1e-18);
  const FieldConfig cfg = s.field();
  EXPECT_NEAR(cfg.units.charge * cfg.phi(Vec3(2.0, 0.0, 0.0)), -oracle::alpha_default / 2.0, 1e-18);
}

TEST(SystemConfig, HarmonicAndPolynomialKinds) {
  const auto h = parse_system_config(R"({"potential": {"kind": "harmonic", "stiffness": 0.25}})"_json);
  const FieldConfig hc = h.field();
  EXPECT_NEAR(hc.units.charge * hc.phi(Vec3(0.0, 2.0, 0.0)), 0.5, 1e-15);

  const auto p = parse_system_config(
      R"({"potential": {"kind": "custom-polynomial", "coefficients": {"-1": -0.5, "2": 0.1}}})"_json);
  ASSERT_EQ(p.coefficients.size(), 2u);
  const FieldConfig pc = p.field();
  EXPECT_NEAR(pc.units.charge * pc.phi(Vec3(0.0, 0.0, 2.0)), -0.25 + 0.4, 1e-15);
}

TEST(SystemConfig, UnitsAndCoupling) {
  const auto s = parse_system_config(R"({"coupling": 0.01, "units": {"light_speed": 100, "hbar": 2}})"_json);
  EXPECT_NEAR(s.units.charge * s.units.charge, 0.01 * 2 * 100, 1e-12);
  EXPECT_NEAR(s.units.coupling(), 0.01, 1e-15);
  const auto c = parse_system_config(R"({"units": {"charge": 0.2}})"_json);
  EXPECT_NEAR(c.coupling, 0.04, 1e-15);
  EXPECT_THROW(parse_system_config(R"({"coupling": 0.5, "units": {"charge": 0.2}})"_json), std::invalid_argument);
}

TEST(SystemConfig, RejectsMalformedInput) {
  EXPECT_THROW(parse_system_config(R"({"potentail": {}})"_json), std::invalid_argument);
  EXPECT_THROW(parse_system_config(R"({"potential": {"kind": "yukawa"}})"_json), std::invalid_argument);
  EXPECT_THROW(parse_system_config(R"({"potential": {"kind": "harmonic", "stiffness": -1}})"_json),
               std::invalid_argument);
  EXPECT_THROW(parse_system_config(R"({"potential": {"coefficients": {"x": 1}}})"_json), std::invalid_argument);
  EXPECT_THROW(parse_system_config(R"({"units": {"mass": 0}})"_json), std::invalid_argument);
  EXPECT_THROW(parse_system_config(R"([1, 2])"_json), std::invalid_argument);
  EXPECT_THROW(load_system_config("/nonexistent/spintorus.json"), std::invalid_argument);
}

TEST(SystemConfig, CanonicalFormRoundTrips) {
  const auto s = parse_system_config(
      R"({"potential": {"kind": "custom-polynomial", "coefficients": {"3": 1e-3, "-1": -0.1}}, "coupling": 0.02})"_json);
  const auto again = parse_system_config(s.canonical());
  EXPECT_EQ(again.canonical().dump(), s.canonical().dump());
}

TEST(SystemConfig, LoadsFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "spintorus_config_test.json";
  std::ofstream(path) << R"({"potential": {"kind": "harmonic"}, "coupling": 0.1})";
  const auto s = load_system_config(path);
  EXPECT_EQ(s.kind, "harmonic");
  EXPECT_DOUBLE_EQ(s.coupling, 0.1);
  std::filesystem::remove(path);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(TrajectoryIo, CsvColumnsAndSpinNorm) {
  const FieldConfig cfg = coulomb_field();
  FlowOptions opt;
  opt.sample_times = {0.0, 1e4, 2e4, 3e4};
  const PhasePoint init{Vec3(0.0, 0.007, 0.0), Vec3(150.0, 0.0, 0.0)};
  const Trajectory traj = hamiltonian_flow(init, cfg, Branch::positive, 3e4, opt);
  const auto samples = orbit_samples(traj, cfg, Vec3(0.0, 0.6, 0.8));
  ASSERT_EQ(samples.size(), 4u);
  EXPECT_EQ(samples[0].energy_drift, 0.0);
  for (const auto& s : samples) {
    EXPECT_NEAR(s.s.norm(), 1.0, 1e-12);
    EXPECT_LT(std::abs(s.energy_drift), 1e-10);
  }
  std::ostringstream out;
  write_orbit_csv(out, samples, {"hello"});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# hello");
  std::getline(in, line);
  EXPECT_EQ(line, "t,x1,x2,x3,p1,p2,p3,s1,s2,s3,energy_drift");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10);
  }
  EXPECT_EQ(rows, 4);
  const auto j = orbit_to_json(samples);
  ASSERT_EQ(j.size(), 4u);
  EXPECT_EQ(j[1]["t"].get<double>(), 1e4);
  EXPECT_EQ(j[0]["s"][2].get<double>(), 0.8);
}

TEST(TrajectoryIo, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}
