#include "spintorus_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <spintorus/errors.hpp>
#include <spintorus/integrability.hpp>
#include <spintorus/trajectory_io.hpp>

namespace spintorus::cli {

namespace {

using Row = std::vector<std::string>;

std::string fixed(double v, int digits = 15) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fraction(int twice) {
  if (twice % 2 == 0) return std::to_string(twice / 2);
  return (twice > 0 ? "+" : "-") + std::to_string(std::abs(twice)) + "/2";
}

std::vector<std::string> header_lines(const nlohmann::json& meta) {
  return {"spintorus " + meta["version"].get<std::string>() + " " + meta["command"].get<std::string>(),
          "config_hash=" + meta["config_hash"].get<std::string>(),
          "seed=" + std::to_string(meta["seed"].get<std::uint64_t>()),
          "config=" + meta["config"].dump()};
}

void write_csv(std::ostream& out, const nlohmann::json& meta, const Row& head, const std::vector<Row>& rows) {
  for (const auto& line : header_lines(meta)) out << "# " << line << '\n';
  auto emit = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  };
  emit(head);
  for (const auto& r : rows) emit(r);
}

void write_table(std::ostream& out, const nlohmann::json& meta, const Row& head, const std::vector<Row>& rows) {
  std::vector<std::size_t> width(head.size());
  for (std::size_t i = 0; i < head.size(); ++i) width[i] = head[i].size();
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  out << "# " << header_lines(meta)[0] << "  config_hash=" << meta["config_hash"].get<std::string>()
      << "  seed=" << meta["seed"].get<std::uint64_t>() << '\n';
  auto emit = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << (i ? "  " : "") << std::string(width[i] - r[i].size(), ' ') << r[i];
    }
    out << '\n';
  };
  emit(head);
  for (const auto& r : rows) emit(r);
}

void write_json(std::ostream& out, nlohmann::json body, const nlohmann::json& meta) {
  for (const auto& item : meta.items()) body[item.key()] = item.value();
  out << body.dump(2) << '\n';
}

/// Flat reports (no tabular payload) in any format.
void write_scalar_report(std::ostream& out, Format format, const nlohmann::json& body, const nlohmann::json& meta) {
  if (format == Format::json) {
    write_json(out, body, meta);
    return;
  }
  std::vector<Row> rows;
  for (const auto& item : body.items()) {
    const auto& v = item.value();
    std::string text;
    if (v.is_string()) {
      text = v.get<std::string>();
    } else if (v.is_number_float()) {
      text = format == Format::csv ? format_number(v.get<double>()) : fixed(v.get<double>());
    } else {
      text = v.dump();
    }
    rows.push_back({item.key(), text});
  }
  if (format == Format::csv) {
    write_csv(out, meta, {"key", "value"}, rows);
  } else {
    write_table(out, meta, {"key", "value"}, rows);
  }
}

nlohmann::json qn_json(const QuantumNumbers& qn) {
  return {{"n_r", qn.n_r}, {"l", qn.l}, {"m_s", qn.m_s()}};
}

nlohmann::json level_json(const LevelRecord& r) {
  return {{"n_r", r.qn.n_r},
          {"l", r.qn.l},
          {"m_s", r.qn.m_s()},
          {"spin", r.qn.spin()},
          {"E", r.E},
          {"E_minus_mc2", r.w.value},
          {"I_r", r.I_r},
          {"L", r.L},
          {"principal", r.principal},
          {"multiplicity", r.multiplicity},
          {"iterations", r.iterations},
          {"corrections",
           {{"mu_r", r.corrections.mu_r},
            {"mu_L", r.corrections.mu_L},
            {"alpha_r", r.corrections.alpha_r},
            {"alpha_L", r.corrections.alpha_L}}}};
}

nlohmann::json failures_json(const std::vector<LevelFailure>& failures) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : failures) {
    auto j = qn_json(f.qn);
    j["message"] = f.message;
    arr.push_back(j);
  }
  return arr;
}

int report_failures(const std::vector<LevelFailure>& failures, std::ostream& err) {
  if (failures.empty()) return kExitOk;
  err << "error: " << failures.size() << " level(s) failed to solve\n";
  for (const auto& f : failures) err << "  " << to_string(f.qn) << ": " << f.message << '\n';
  return kExitFailure;
}

nlohmann::json torus_args_json(const TorusArgs& t) {
  nlohmann::json j{{"angmom", t.angmom}};
  j["energy"] = t.energy ? nlohmann::json(*t.energy) : nlohmann::json(nullptr);
  j["excess_energy"] = t.excess_energy ? nlohmann::json(*t.excess_energy) : nlohmann::json(nullptr);
  return j;
}

/// Explicit energy, or halfway (in |w_circ|) above the circular orbit.
ExcessEnergy resolve_energy(const TorusArgs& t, double L, const FieldConfig& cfg) {
  if (t.excess_energy) return {*t.excess_energy};
  if (t.energy) return excess_energy(*t.energy, cfg);
  const double wc = circular_orbit(L, cfg).energy.value;
  return {wc + 0.5 * std::abs(wc)};
}

Vec3 to_vec(const std::vector<double>& v) { return {v.at(0), v.at(1), v.at(2)}; }

}  // namespace

std::string to_string(Format f) {
  switch (f) {
    case Format::json: return "json";
    case Format::csv: return "csv";
    case Format::table: return "table";
  }
  return "?";
}

nlohmann::json run_metadata(const RunConfig& run, const nlohmann::json& args) {
  const nlohmann::json config{{"system", run.system.canonical()},
                              {"tolerance", run.tolerance},
                              {"args", args}};
  return {{"version", SPINTORUS_VERSION},
          {"command", run.subcommand},
          {"seed", run.seed},
          {"config_hash", fnv1a_hex(config.dump())},
          {"config", config}};
}

int cmd_levels(const RunConfig& run, const LevelsArgs& args, std::ostream& out, std::ostream& err) {
  nlohmann::json a{{"scheme", to_string(args.scheme)},
                   {"nmax", args.n_max},
                   {"twice_spin", args.twice_spin},
                   {"group_tol", args.group_tol}};
  a["emax"] = args.e_max ? nlohmann::json(*args.e_max) : nlohmann::json(nullptr);
  const auto meta = run_metadata(run, a);

  const FieldConfig cfg = run.system.field();
  EnumerateOptions opt;
  opt.solve.transport_tol = run.tolerance;
  opt.twice_spin = args.twice_spin;
  opt.threads = run.threads;
  const Spectrum spec = args.e_max ? enumerate_spectrum(*args.e_max, cfg, args.scheme, opt)
                                   : enumerate_levels(args.n_max, cfg, args.scheme, opt);
  const auto groups = group_levels(spec.levels, cfg, args.group_tol);

  if (run.format == Format::json) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& r : spec.levels) levels.push_back(level_json(r));
    nlohmann::json gj = nlohmann::json::array();
    for (const auto& g : groups) {
      gj.push_back({{"E", g.E}, {"E_minus_mc2", g.w.value}, {"degeneracy", g.degeneracy}, {"members", g.members}});
    }
    write_json(out,
               {{"scheme", to_string(args.scheme)},
                {"count", spec.levels.size()},
                {"levels", levels},
                {"groups", gj},
                {"failures", failures_json(spec.failures)}},
               meta);
  } else {
    const double hbar = cfg.units.hbar;
    const bool csv = run.format == Format::csv;
    auto num = [&](double v) { return csv ? format_number(v) : fixed(v); };
    std::vector<Row> rows;
    for (const auto& r : spec.levels) {
      rows.push_back({std::to_string(std::lround(r.principal)), std::to_string(r.qn.n_r), std::to_string(r.qn.l),
                      csv ? format_number(r.qn.m_s()) : fraction(r.qn.twice_m_s), num(r.E), num(r.w.value),
                      num(r.I_r / hbar), num(r.L / hbar), num(r.corrections.alpha_r), num(r.corrections.alpha_L),
                      std::to_string(r.multiplicity)});
    }
    const Row head{"n", "n_r", "l", "m_s", "E", "E_minus_mc2", "I_r/hbar", "L/hbar", "alpha_r", "alpha_L",
                   "multiplicity"};
    if (csv) {
      write_csv(out, meta, head, rows);
    } else {
      write_table(out, meta, head, rows);
    }
  }
  return report_failures(spec.failures, err);
}

int cmd_compare(const RunConfig& run, const CompareArgs& args, std::ostream& out, std::ostream& err) {
  const nlohmann::json a{{"a", to_string(args.a)}, {"b", to_string(args.b)}, {"nmax", args.n_max}};
  const auto meta = run_metadata(run, a);
  const FieldConfig cfg = run.system.field();
  EnumerateOptions opt;
  opt.solve.transport_tol = run.tolerance;
  opt.threads = run.threads;
  const Spectrum sa = enumerate_levels(args.n_max, cfg, args.a, opt);
  const Spectrum sb = enumerate_levels(args.n_max, cfg, args.b, opt);
  const Comparison cmp = compare_spectra(sa, sb, cfg);
  const double hbar = cfg.units.hbar;

  if (run.format == Format::json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : cmp.rows) {
      auto ja = qn_json(r.a.qn);
      ja["E"] = r.a.E;
      auto jb = qn_json(r.b.qn);
      jb["E"] = r.b.E;
      rows.push_back({{"I_r", r.I_r}, {"L", r.L}, {"a", ja}, {"b", jb}, {"delta", r.delta}});
    }
    std::vector<LevelFailure> failures = sa.failures;
    failures.insert(failures.end(), sb.failures.begin(), sb.failures.end());
    write_json(out,
               {{"a", to_string(args.a)},
                {"b", to_string(args.b)},
                {"rows", rows},
                {"max_delta", cmp.max_delta},
                {"unmatched", cmp.unmatched},
                {"failures", failures_json(failures)}},
               meta);
  } else {
    const bool csv = run.format == Format::csv;
    auto num = [&](double v) { return csv ? format_number(v) : fixed(v); };
    auto ms = [&](const QuantumNumbers& q) { return csv ? format_number(q.m_s()) : fraction(q.twice_m_s); };
    std::vector<Row> rows;
    for (const auto& r : cmp.rows) {
      rows.push_back({num(r.I_r / hbar), num(r.L / hbar), std::to_string(r.a.qn.n_r), std::to_string(r.a.qn.l),
                      ms(r.a.qn), std::to_string(r.b.qn.n_r), std::to_string(r.b.qn.l), ms(r.b.qn), num(r.a.E),
                      num(r.b.E), num(r.delta)});
    }
    const Row head{"I_r/hbar", "L/hbar", "a.n_r", "a.l", "a.m_s", "b.n_r", "b.l", "b.m_s", "E_a", "E_b", "delta"};
    if (csv) {
      write_csv(out, meta, head, rows);
    } else {
      write_table(out, meta, head, rows);
      out << "# max_delta=" << fixed(cmp.max_delta, 6) << "  unmatched=" << cmp.unmatched << '\n';
    }
  }
  const int ca = report_failures(sa.failures, err);
  const int cb = report_failures(sb.failures, err);
  return std::max(ca, cb);
}

int cmd_spin_angle(const RunConfig& run, const SpinAngleArgs& args, std::ostream& out, std::ostream&) {
  auto a = torus_args_json(args.torus);
  a["cycle"] = to_string(args.cycle);
  const auto meta = run_metadata(run, a);
  const FieldConfig cfg = run.system.field();
  const double L = args.torus.angmom * cfg.units.hbar;
  const ExcessEnergy w = resolve_energy(args.torus, L, cfg);

  const auto [c_r, c_L] = build_cycles(w, L, cfg);
  const Cycle cycle = args.cycle == CycleLabel::radial    ? c_r
                      : args.cycle == CycleLabel::angular ? c_L
                                                          : azimuthal_cycle();
  const SpinAngle sa = spin_rotation_angle(cycle, w, L, cfg, run.tolerance);
  const int maslov = maslov_index(cycle, w, L, cfg);
  const OrbitParams op = orbit_params(w, L, cfg);

  write_scalar_report(out, run.format,
                      {{"cycle", to_string(args.cycle)},
                       {"alpha", sa.alpha},
                       {"unwrapped", sa.unwrapped},
                       {"degenerate", sa.degenerate},
                       {"maslov", maslov},
                       {"I_r", op.I_r},
                       {"T_r", op.T_r},
                       {"dphi", op.dphi},
                       {"E", op.E},
                       {"E_minus_mc2", op.w.value},
                       {"L", L},
                       {"latitude_drift", sa.latitude_drift},
                       {"return_distance", sa.return_distance}},
                      meta);
  return kExitOk;
}

int cmd_orbit(const RunConfig& run, const OrbitArgs& args, std::ostream& out, std::ostream&) {
  nlohmann::json a = torus_args_json(args.torus);
  a["periods"] = args.periods;
  a["samples_per_period"] = args.samples_per_period;
  a["spin"] = args.spin;
  a["x"] = args.x;
  a["p"] = args.p;
  a["time"] = args.time ? nlohmann::json(*args.time) : nlohmann::json(nullptr);
  const auto meta = run_metadata(run, a);
  const FieldConfig cfg = run.system.field();

  PhasePoint init;
  double duration = 0.0;
  std::size_t n_samples = 0;
  if (!args.x.empty()) {
    init = {to_vec(args.p), to_vec(args.x)};
    duration = *args.time;
    n_samples = static_cast<std::size_t>(std::max(1, args.samples_per_period));
  } else {
    const double L = args.torus.angmom * cfg.units.hbar;
    TorusChart chart;
    chart.w = resolve_energy(args.torus, L, cfg);
    chart.L = L;
    init = torus_point(chart, cfg);
    duration = args.periods * radial_period(chart.w, L, cfg);
    n_samples = static_cast<std::size_t>(std::ceil(args.periods * args.samples_per_period));
  }
  FlowOptions fo;
  fo.tolerance = run.tolerance;
  fo.sample_times.resize(n_samples + 1);
  for (std::size_t k = 0; k <= n_samples; ++k) {
    fo.sample_times[k] = duration * static_cast<double>(k) / static_cast<double>(n_samples);
  }
  const Trajectory traj = hamiltonian_flow(init, cfg, Branch::positive, duration, fo);
  const auto samples = orbit_samples(traj, cfg, to_vec(args.spin).normalized());
  double max_drift = 0.0;
  for (const auto& s : samples) max_drift = std::max(max_drift, std::abs(s.energy_drift));

  if (run.format == Format::json) {
    write_json(out,
               {{"energy", traj.energy},
                {"duration", duration},
                {"max_energy_drift", max_drift},
                {"samples", orbit_to_json(samples)}},
               meta);
  } else if (run.format == Format::csv) {
    auto header = header_lines(meta);
    header.push_back("energy=" + format_number(traj.energy) + " duration=" + format_number(duration));
    write_orbit_csv(out, samples, header);
  } else {
    std::vector<Row> rows;
    for (const auto& s : samples) {
      Row r{fixed(s.t, 10)};
      for (int i = 0; i < 3; ++i) r.push_back(fixed(s.pt.x[i], 10));
      for (int i = 0; i < 3; ++i) r.push_back(fixed(s.pt.p[i], 10));
      for (int i = 0; i < 3; ++i) r.push_back(fixed(s.s[i], 10));
      r.push_back(fixed(s.energy_drift, 3));
      rows.push_back(std::move(r));
    }
    write_table(out, meta, {"t", "x1", "x2", "x3", "p1", "p2", "p3", "s1", "s2", "s3", "energy_drift"}, rows);
  }
  return kExitOk;
}

int cmd_check_integrability(const RunConfig& run, const IntegrabilityArgs& args, std::ostream& out,
                            std::ostream&) {
  const nlohmann::json a{{"points", args.points},  {"lmin", args.l_min},
                         {"lmax", args.l_max},     {"offset_bz", args.offset_bz},
                         {"bundle_loops", args.bundle_loops}, {"theta", args.theta}};
  const auto meta = run_metadata(run, a);
  const FieldConfig cfg = run.system.field();
  const double hbar = cfg.units.hbar;
  const Vec3 offset(0.0, 0.0, args.offset_bz);

  const GeneratorSet gens = kepler_generator_set(cfg, offset);
  const auto report =
      check_integrability(gens, kepler_bound_sampler(cfg, args.l_min * hbar, args.l_max * hbar), args.points, run.seed);
  nlohmann::json body{{"max_residual", report.max_residual},
                      {"max_bracket", report.max_bracket},
                      {"convergence_order", report.convergence_order},
                      {"verdict", to_string(report.verdict)},
                      {"points", report.points}};
  if (args.bundle_loops > 0) {
    const double L = 0.5 * (args.l_min + args.l_max) * hbar;
    const ExcessEnergy w = resolve_energy({}, L, cfg);
    BundleOptions bo;
    bo.tol = run.tolerance;
    bo.seed = run.seed;
    bo.spin_field_offset = offset;
    const auto b = check_bundle_geometry(w, L, args.theta, cfg, args.bundle_loops, bo);
    body["bundle_max_deviation"] = b.max_deviation;
    body["bundle_max_return_distance"] = b.max_return_distance;
    body["bundle_loops"] = b.loops;
    body["bundle_passed"] = b.passed;
  }
  write_scalar_report(out, run.format, body, meta);
  return kExitOk;
}

}  // namespace spintorus::cli
