#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include <spintorus/errors.hpp>

#include "spintorus_cli/commands.hpp"

namespace spintorus::cli {

namespace {

constexpr const char* kConfigEnv = "SPINTORUS_CONFIG";
const CLI::Range kCount(1, 1 << 20, "COUNT >= 1");

struct CommonFlags {
  std::string config_path;
  std::string system;
  std::optional<double> alpha;
  std::optional<double> stiffness;
  std::optional<double> tolerance;
  std::string format;
  std::uint64_t seed = 42;
  int threads = 1;
  std::string output;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path,
                  std::string("JSON system config (default: $") + kConfigEnv + ")");
  sub->add_option("--system", f.system, "Preset potential, overriding the config's")
      ->check(CLI::IsMember({"kepler", "coulomb", "harmonic", "free"}));
  sub->add_option("--alpha-coupling", f.alpha, "Coupling e^2/(hbar c)")->check(CLI::PositiveNumber);
  sub->add_option("--stiffness", f.stiffness, "Spring constant of the harmonic preset")
      ->check(CLI::PositiveNumber);
  sub->add_option("--tol", f.tolerance, "Integrator tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
  sub->add_option("--seed", f.seed, "RNG seed (recorded in the output)")->capture_default_str();
  sub->add_option("--threads", f.threads, "Worker threads")->check(kCount)->capture_default_str();
  sub->add_option("-o,--output", f.output, "Write the artifact to this file instead of stdout");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument("malformed config file " + path + ": " + ex.what());
  }
}

SystemConfig resolve_system(const CommonFlags& f) {
  std::string path = f.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  }
  nlohmann::json j = path.empty() ? nlohmann::json::object() : read_json_file(path);
  if (!j.is_object()) throw std::invalid_argument("system config must be a JSON object");
  if (!f.system.empty()) {
    if (f.system == "kepler" || f.system == "coulomb") {
      j["potential"] = {{"kind", "coulomb"}};
    } else if (f.system == "harmonic") {
      j["potential"] = {{"kind", "harmonic"}};
    } else {
      j["potential"] = {{"kind", "custom-polynomial"}, {"coefficients", nlohmann::json::object()}};
    }
  }
  if (f.stiffness) {
    const bool harmonic = j.contains("potential") && j["potential"].value("kind", "") == "harmonic";
    if (!harmonic) throw std::invalid_argument("--stiffness applies to the harmonic potential only");
    j["potential"]["stiffness"] = *f.stiffness;
  }
  if (f.alpha) {
    j["coupling"] = *f.alpha;
    if (j.contains("units") && j["units"].is_object()) j["units"].erase("charge");
  }
  return parse_system_config(j);
}

Format parse_format(const std::string& s, Format fallback) {
  if (s.empty()) return fallback;
  if (s == "csv") return Format::csv;
  if (s == "table") return Format::table;
  return Format::json;
}

int parse_twice_spin(const std::string& s) {
  const auto slash = s.find('/');
  std::size_t used = 0;
  int value = -1;
  try {
    if (slash == std::string::npos) {
      value = 2 * std::stoi(s, &used);
      if (used != s.size()) value = -1;
    } else if (s.substr(slash) == "/2") {
      value = std::stoi(s.substr(0, slash), &used);
      if (used != slash) value = -1;
    }
  } catch (const std::exception&) {
    value = -1;
  }
  if (value < 0) throw std::invalid_argument("--spin must be a nonnegative integer or half-integer like 1/2");
  return value;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semiclassical torus quantization for spinning particles", "spintorus"};
  app.set_version_flag("--version", std::string(SPINTORUS_VERSION));
  app.require_subcommand(1);

  CommonFlags common;
  std::function<int(const RunConfig&, std::ostream&)> action;

  LevelsArgs levels;
  std::string levels_scheme = "ebk-spin";
  std::string levels_spin = "1/2";
  auto* sub_levels = app.add_subcommand("levels", "Quantized energy levels and their degeneracies");
  add_common(sub_levels, common);
  sub_levels->add_option("--scheme", levels_scheme, "Quantization scheme")
      ->check(CLI::IsMember({"sommerfeld-old", "ebk-noswitch", "ebk-spin", "dirac-exact"}))
      ->capture_default_str();
  sub_levels->add_option("--nmax", levels.n_max, "Largest principal index (I_r + L)/hbar")
      ->check(kCount)
      ->capture_default_str();
  sub_levels->add_option("--emax", levels.e_max, "Keep levels with E <= EMAX instead of using --nmax");
  sub_levels->add_option("--spin", levels_spin, "Particle spin s (0, 1/2, 1, ...)")->capture_default_str();
  sub_levels->add_option("--group-tol", levels.group_tol, "Degeneracy grouping tolerance in units of mc^2")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub_levels->callback([&] {
    levels.scheme = parse_scheme(levels_scheme);
    levels.twice_spin = parse_twice_spin(levels_spin);
    action = [&](const RunConfig& run, std::ostream& o) { return cmd_levels(run, levels, o, err); };
  });

  CompareArgs compare;
  std::string cmp_a = "sommerfeld-old";
  std::string cmp_b = "ebk-spin";
  auto* sub_compare = app.add_subcommand("compare", "Level-by-level energy differences between two schemes");
  add_common(sub_compare, common);
  const auto schemes = CLI::IsMember({"sommerfeld-old", "ebk-noswitch", "ebk-spin", "dirac-exact"});
  sub_compare->add_option("--a", cmp_a, "First scheme")->check(schemes)->capture_default_str();
  sub_compare->add_option("--b", cmp_b, "Second scheme")->check(schemes)->capture_default_str();
  sub_compare->add_option("--nmax", compare.n_max, "Largest principal index")
      ->check(kCount)
      ->capture_default_str();
  sub_compare->callback([&] {
    compare.a = parse_scheme(cmp_a);
    compare.b = parse_scheme(cmp_b);
    action = [&](const RunConfig& run, std::ostream& o) { return cmd_compare(run, compare, o, err); };
  });

  auto add_torus = [](CLI::App* sub, TorusArgs& t) {
    auto* e = sub->add_option("--energy", t.energy, "Total energy E (default: halfway above the circular orbit)");
    sub->add_option("--excess-energy", t.excess_energy, "E - mc^2, for precision near the rest energy")
        ->excludes(e);
    sub->add_option("--angmom", t.angmom, "Angular momentum |L| in units of hbar")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  SpinAngleArgs spin_angle;
  std::string cycle = "r";
  auto* sub_spin = app.add_subcommand("spin-angle", "Spin rotation angle and Maslov index of a torus cycle");
  add_common(sub_spin, common);
  add_torus(sub_spin, spin_angle.torus);
  sub_spin->add_option("--cycle", cycle, "Fundamental cycle")
      ->check(CLI::IsMember({"r", "L", "z"}))
      ->capture_default_str();
  sub_spin->callback([&] {
    spin_angle.cycle = cycle == "r" ? CycleLabel::radial : cycle == "L" ? CycleLabel::angular : CycleLabel::azimuthal;
    action = [&](const RunConfig& run, std::ostream& o) { return cmd_spin_angle(run, spin_angle, o, err); };
  });

  OrbitArgs orbit;
  auto* sub_orbit = app.add_subcommand("orbit", "Sampled trajectory with transported spin");
  add_common(sub_orbit, common);
  add_torus(sub_orbit, orbit.torus);
  sub_orbit->add_option("--periods", orbit.periods, "Duration in radial periods")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub_orbit->add_option("--samples-per-period", orbit.samples_per_period,
                        "Samples per radial period (total samples with --x/--p)")
      ->check(kCount)
      ->capture_default_str();
  sub_orbit->add_option("--spin", orbit.spin, "Initial spin direction x,y,z")->delimiter(',')->expected(3);
  auto* ox = sub_orbit->add_option("--x", orbit.x, "Initial position x,y,z")->delimiter(',')->expected(3);
  auto* op = sub_orbit->add_option("--p", orbit.p, "Initial momentum x,y,z")->delimiter(',')->expected(3);
  auto* ot = sub_orbit->add_option("--time", orbit.time, "Duration with an explicit initial condition")
                 ->check(CLI::PositiveNumber);
  ox->needs(op)->needs(ot);
  op->needs(ox);
  ot->needs(ox);
  sub_orbit->callback([&] {
    action = [&](const RunConfig& run, std::ostream& o) { return cmd_orbit(run, orbit, o, err); };
  });

  IntegrabilityArgs integ;
  auto* sub_integ = app.add_subcommand("check-integrability", "Involution residuals of the spin generator set");
  add_common(sub_integ, common);
  sub_integ->add_option("--points", integ.points, "Random phase-space points")
      ->check(kCount)
      ->capture_default_str();
  sub_integ->add_option("--lmin", integ.l_min, "Smallest sampled |L|/hbar")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub_integ->add_option("--lmax", integ.l_max, "Largest sampled |L|/hbar")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub_integ->add_option("--offset-bz", integ.offset_bz, "Constant spin field added to the H flow (negative control)")
      ->capture_default_str();
  sub_integ->add_option("--bundle-loops", integ.bundle_loops, "Also transport spins around this many random loops")
      ->capture_default_str();
  sub_integ->add_option("--theta", integ.theta, "Spin latitude for the loop test")->capture_default_str();
  sub_integ->callback([&] {
    if (integ.l_min > integ.l_max) throw CLI::ValidationError("--lmin", "must not exceed --lmax");
    action = [&](const RunConfig& run, std::ostream& o) { return cmd_check_integrability(run, integ, o, err); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << SPINTORUS_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  }

  // Help requested on a subcommand is handled by CLI11 above; `action` is
  // always set once parsing succeeded.
  RunConfig run;
  const auto* chosen = app.get_subcommands().front();
  run.subcommand = chosen->get_name();
  run.seed = common.seed;
  run.threads = common.threads;
  run.tolerance = common.tolerance.value_or(run.subcommand == "orbit" ? 1e-10 : 1e-11);
  run.format = parse_format(common.format, run.subcommand == "orbit" ? Format::csv : Format::json);
  try {
    run.system = resolve_system(common);
  } catch (const std::exception& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  }

  std::ostringstream buffer;
  int code = kExitOk;
  try {
    code = action(run, buffer);
  } catch (const std::invalid_argument& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  }

  if (common.output.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(common.output, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << common.output << '\n';
      return kExitFailure;
    }
    file << buffer.str();
  }
  return code;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"spintorus"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace spintorus::cli
