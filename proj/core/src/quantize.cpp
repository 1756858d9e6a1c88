#include "spintorus/quantize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <boost/math/tools/roots.hpp>

#include "spintorus/errors.hpp"

namespace spintorus {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool carries_spin(Scheme s) { return s == Scheme::ebk_spin || s == Scheme::dirac_exact; }

ActionPair nominal_actions(const QuantumNumbers& qn, Scheme s) {
  const Corrections c = nominal_corrections(s);
  return {qn.n_r + c.mu_r / 4.0 + qn.m_s() * c.alpha_r / kTwoPi,
          qn.l + c.mu_L / 4.0 + qn.m_s() * c.alpha_L / kTwoPi};
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::sommerfeld_old: return "sommerfeld-old";
    case Scheme::ebk_noswitch: return "ebk-noswitch";
    case Scheme::ebk_spin: return "ebk-spin";
    case Scheme::dirac_exact: return "dirac-exact";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::sommerfeld_old, Scheme::ebk_noswitch, Scheme::ebk_spin, Scheme::dirac_exact}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string to_string(const QuantumNumbers& qn) {
  std::ostringstream os;
  os << "(n_r=" << qn.n_r << ", l=" << qn.l << ", m_s=" << qn.twice_m_s << "/2)";
  return os.str();
}

Corrections nominal_corrections(Scheme s) {
  switch (s) {
    case Scheme::sommerfeld_old: return {0.0, 0.0, 0.0, 0.0};
    case Scheme::ebk_noswitch: return {2.0, 2.0, 0.0, 0.0};
    case Scheme::ebk_spin:
    case Scheme::dirac_exact: return {2.0, 2.0, kTwoPi, kTwoPi};
  }
  return {};
}

ActionPair quantized_actions(const QuantumNumbers& qn, const Corrections& corr, const FieldConfig& cfg) {
  const double hbar = cfg.units.hbar;
  double I = hbar * (qn.n_r + corr.mu_r / 4.0 + qn.m_s() * corr.alpha_r / kTwoPi);
  const double L = hbar * (qn.l + corr.mu_L / 4.0 + qn.m_s() * corr.alpha_L / kTwoPi);
  if (I < 0.0 && I > -1e-8 * hbar) I = 0.0;
  if (I < 0.0) throw NoBoundStateError("negative radial action for " + to_string(qn));
  if (!(L > 0.0)) throw NoBoundStateError("non-positive angular momentum for " + to_string(qn));
  const double k = cfg.central ? cfg.central->coulomb_strength : 0.0;
  if (k > 0.0 && cfg.units.light_speed * L <= k) {
    throw NoBoundStateError("angular momentum at the fall-to-centre bound for " + to_string(qn));
  }
  return {I, L};
}

bool is_admissible(const QuantumNumbers& qn, Scheme s) {
  if (qn.n_r < 0 || qn.l < 0) return false;
  if (carries_spin(s)) {
    if (qn.twice_spin < 0 || std::abs(qn.twice_m_s) > qn.twice_spin) return false;
    if ((qn.twice_spin - qn.twice_m_s) % 2 != 0) return false;
  } else if (qn.twice_m_s != 0) {
    return false;
  }
  const ActionPair a = nominal_actions(qn, s);
  return a.I_r >= -1e-12 && a.L > 1e-12;
}

ExcessEnergy exact_excess_energy(double I_r_over_hbar, double L_over_hbar, const FieldConfig& cfg) {
  const double alpha = cfg.units.coupling();
  if (!(L_over_hbar > alpha)) throw NoBoundStateError("L/hbar must exceed the coupling");
  if (I_r_over_hbar < 0.0) throw NoBoundStateError("negative radial action");
  const double d = I_r_over_hbar + std::sqrt(L_over_hbar * L_over_hbar - alpha * alpha);
  const double x = alpha * alpha / (d * d);
  const double root = std::sqrt(1.0 + x);
  return {-cfg.units.rest_energy() * x / (root * (1.0 + root))};
}

double exact_energy(double I_r_over_hbar, double L_over_hbar, const FieldConfig& cfg) {
  return total_energy(exact_excess_energy(I_r_over_hbar, L_over_hbar, cfg), cfg);
}

ExcessEnergy solve_energy(double I_r, double L, const FieldConfig& cfg, double rel_tol) {
  const CircularOrbit circ = circular_orbit(L, cfg);
  if (I_r <= 0.0) return circ.energy;
  auto f = [&](double w) { return radial_action(ExcessEnergy{w}, L, cfg) - I_r; };

  const auto& u = cfg.units;
  const double natural = u.hbar * u.hbar / (u.mass * cfg.length_scale * cfg.length_scale);
  const double scale = circ.energy.value != 0.0 ? std::abs(circ.energy.value) : natural;
  double a = circ.energy.value;
  double fa = -I_r;
  double step = scale * std::min(0.5, 0.5 * I_r / L);
  double b = a, fb = fa;
  bool bracketed = false;
  for (int it = 0; it < 400 && !bracketed; ++it) {
    b = a + step;
    try {
      fb = f(b);
    } catch (const NoBoundOrbitError&) {
      step *= 0.5;
      continue;
    }
    if (fb < 0.0) {
      a = b;
      fa = fb;
      step *= 2.0;
    } else {
      bracketed = true;
    }
  }
  if (!bracketed) throw SolverError("could not bracket the quantized energy", a, b);
  if (fb == 0.0) return {b};

  auto tol = [rel_tol](double x, double y) {
    return std::abs(x - y) <= rel_tol * std::min(std::abs(x), std::abs(y));
  };
  std::uintmax_t iters = 200;
  try {
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    return {0.5 * (lo + hi)};
  } catch (const std::exception& ex) {
    throw SolverError(std::string("energy root failed: ") + ex.what(), a, b);
  }
}

Corrections measure_corrections(double I_r, double L, const FieldConfig& cfg, const SolveOptions& opt) {
  const double hbar = cfg.units.hbar;
  const double I = I_r >= 1e-6 * hbar ? I_r : opt.probe_action * hbar;
  TorusChart chart;
  chart.w = solve_energy(I, L, cfg, opt.energy_tol);
  chart.L = L;
  const auto [cr, cl] = build_cycles(chart.w, L, cfg);
  Corrections c;
  c.mu_r = maslov_index(cr, chart, cfg, opt.transport_tol);
  c.mu_L = maslov_index(cl, chart, cfg, opt.transport_tol);
  c.alpha_r = spin_rotation_angle(cr, chart, cfg, opt.transport_tol).alpha;
  c.alpha_L = spin_rotation_angle(cl, chart, cfg, opt.transport_tol).alpha;
  return c;
}

int magnetic_multiplicity(double L_over_hbar, double m_s, double alpha_z, double mu_z) {
  const double shift = m_s * alpha_z / kTwoPi + mu_z / 4.0;
  const double lo = -L_over_hbar - shift;
  const double hi = L_over_hbar - shift;
  const long m_min = static_cast<long>(std::floor(lo + 1e-9)) + 1;
  const long m_max = static_cast<long>(std::ceil(hi - 1e-9)) - 1;
  return static_cast<int>(std::max(0L, m_max - m_min + 1));
}

LevelRecord solve_level(const QuantumNumbers& qn, const FieldConfig& cfg, Scheme scheme, const SolveOptions& opt) {
  if (!is_admissible(qn, scheme)) {
    throw std::invalid_argument(to_string(qn) + " is not admissible for " + to_string(scheme));
  }
  const double hbar = cfg.units.hbar;
  LevelRecord rec;
  rec.qn = qn;
  rec.scheme = scheme;
  rec.corrections = nominal_corrections(scheme);
  double alpha_z = carries_spin(scheme) ? kTwoPi : 0.0;

  if (scheme == Scheme::dirac_exact) {
    const ActionPair a = quantized_actions(qn, rec.corrections, cfg);
    rec.I_r = a.I_r;
    rec.L = a.L;
    rec.w = exact_excess_energy(a.I_r / hbar, a.L / hbar, cfg);
    rec.iterations = 0;
  } else if (scheme == Scheme::ebk_spin) {
    Corrections corr{2.0, 2.0, 0.0, 0.0};
    bool converged = false;
    for (int it = 1; it <= opt.max_iterations; ++it) {
      const ActionPair a = quantized_actions(qn, corr, cfg);
      rec.I_r = a.I_r;
      rec.L = a.L;
      rec.w = solve_energy(a.I_r, a.L, cfg, opt.energy_tol);
      rec.corrections = corr;
      rec.iterations = it;
      const Corrections next = measure_corrections(a.I_r, a.L, cfg, opt);
      const bool same = next.mu_r == corr.mu_r && next.mu_L == corr.mu_L &&
                        std::abs(next.alpha_r - corr.alpha_r) < 1e-9 &&
                        std::abs(next.alpha_L - corr.alpha_L) < 1e-9;
      if (same) {
        converged = true;
        break;
      }
      corr = next;
    }
    if (!converged) throw SolverError("spin corrections did not settle for " + to_string(qn), 0.0, 0.0);
    TorusChart chart;
    chart.w = rec.w;
    chart.L = rec.L;
    if (rec.I_r >= 1e-6 * hbar) alpha_z = spin_rotation_angle(azimuthal_cycle(), chart, cfg, opt.transport_tol).alpha;
  } else {
    const ActionPair a = quantized_actions(qn, rec.corrections, cfg);
    rec.I_r = a.I_r;
    rec.L = a.L;
    rec.w = solve_energy(a.I_r, a.L, cfg, opt.energy_tol);
    rec.iterations = 1;
  }
  rec.E = total_energy(rec.w, cfg);
  rec.principal = (rec.I_r + rec.L) / hbar;
  rec.multiplicity = magnetic_multiplicity(rec.L / hbar, carries_spin(scheme) ? qn.m_s() : 0.0, alpha_z);
  return rec;
}

std::vector<QuantumNumbers> admissible_states(int n_max, Scheme scheme, int twice_spin) {
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  std::vector<QuantumNumbers> out;
  std::vector<int> spins;
  if (carries_spin(scheme)) {
    for (int t = -twice_spin; t <= twice_spin; t += 2) spins.push_back(t);
  } else {
    spins.push_back(0);
    twice_spin = 0;
  }
  for (int tms : spins) {
    for (int l = 0; l <= n_max + twice_spin; ++l) {
      for (int nr = 0; nr <= n_max + twice_spin; ++nr) {
        const QuantumNumbers qn{nr, l, tms, twice_spin};
        if (!is_admissible(qn, scheme)) continue;
        const ActionPair a = nominal_actions(qn, scheme);
        if (a.I_r + a.L <= n_max + 1e-9) out.push_back(qn);
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [scheme](const QuantumNumbers& x, const QuantumNumbers& y) {
    const ActionPair ax = nominal_actions(x, scheme), ay = nominal_actions(y, scheme);
    const long nx = std::lround(2.0 * (ax.I_r + ax.L)), ny = std::lround(2.0 * (ay.I_r + ay.L));
    return std::tie(nx, x.twice_m_s, x.l, x.n_r) < std::tie(ny, y.twice_m_s, y.l, y.n_r);
  });
  return out;
}

namespace {

Spectrum solve_all(const std::vector<QuantumNumbers>& states, const FieldConfig& cfg, Scheme scheme,
                   const EnumerateOptions& opt) {
  std::vector<std::optional<LevelRecord>> results(states.size());
  std::vector<std::string> errors(states.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < states.size(); i = next++) {
      try {
        results[i] = solve_level(states[i], cfg, scheme, opt.solve);
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(states.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  Spectrum sp;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (results[i]) {
      sp.levels.push_back(*results[i]);
    } else {
      sp.failures.push_back({states[i], errors[i]});
    }
  }
  return sp;
}

}  // namespace

Spectrum enumerate_levels(int n_max, const FieldConfig& cfg, Scheme scheme, const EnumerateOptions& opt) {
  return solve_all(admissible_states(n_max, scheme, opt.twice_spin), cfg, scheme, opt);
}

Spectrum enumerate_spectrum(double E_max, const FieldConfig& cfg, Scheme scheme, const EnumerateOptions& opt) {
  if (!(E_max < cfg.units.rest_energy())) throw std::invalid_argument("E_max must lie below the rest energy");
  const int twice_spin = carries_spin(scheme) ? opt.twice_spin : 0;
  constexpr int kLimit = 10000;
  Spectrum sp;
  for (int tms = -twice_spin; tms <= twice_spin; tms += 2) {
    for (int l = 0; l < kLimit; ++l) {
      bool any_below = false;
      bool any_admissible = false;
      for (int nr = 0; nr < kLimit; ++nr) {
        const QuantumNumbers qn{nr, l, tms, twice_spin};
        if (!is_admissible(qn, scheme)) {
          if (any_admissible) break;
          if (nr > twice_spin + 1) break;
          continue;
        }
        any_admissible = true;
        try {
          LevelRecord rec = solve_level(qn, cfg, scheme, opt.solve);
          if (rec.E > E_max) break;
          any_below = true;
          sp.levels.push_back(std::move(rec));
        } catch (const std::exception& ex) {
          sp.failures.push_back({qn, ex.what()});
          break;
        }
      }
      if (any_admissible && !any_below) break;
    }
  }
  std::stable_sort(sp.levels.begin(), sp.levels.end(),
                   [](const LevelRecord& a, const LevelRecord& b) { return a.w.value < b.w.value; });
  return sp;
}

std::vector<LevelGroup> group_levels(const std::vector<LevelRecord>& levels, const FieldConfig& cfg, double tol) {
  std::vector<std::size_t> order(levels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return levels[a].w.value < levels[b].w.value; });
  const double gap = tol * cfg.units.rest_energy();
  std::vector<LevelGroup> groups;
  for (std::size_t idx : order) {
    const LevelRecord& r = levels[idx];
    if (groups.empty() || r.w.value - levels[groups.back().members.back()].w.value > gap) {
      groups.push_back({r.E, r.w, 0, {}});
    }
    groups.back().members.push_back(idx);
    groups.back().degeneracy += r.multiplicity;
  }
  return groups;
}

Comparison compare_spectra(const Spectrum& a, const Spectrum& b, const FieldConfig& cfg) {
  using Key = std::pair<long, long>;
  auto key = [](const LevelRecord& r) {
    const ActionPair n = nominal_actions(r.qn, r.scheme);
    return Key{std::lround(2.0 * n.I_r), std::lround(2.0 * n.L)};
  };
  std::multimap<Key, std::size_t> index_a;
  for (std::size_t i = 0; i < a.levels.size(); ++i) index_a.emplace(key(a.levels[i]), i);

  Comparison cmp;
  std::vector<bool> used_a(a.levels.size(), false);
  const double mc2 = cfg.units.rest_energy();
  for (const auto& rb : b.levels) {
    const Key k = key(rb);
    const auto [first, last] = index_a.equal_range(k);
    if (first == last) {
      ++cmp.unmatched;
      continue;
    }
    for (auto it = first; it != last; ++it) {
      const LevelRecord& ra = a.levels[it->second];
      used_a[it->second] = true;
      const double delta = std::abs(ra.w.value - rb.w.value) / mc2;
      cmp.rows.push_back({0.5 * static_cast<double>(k.first) * cfg.units.hbar,
                          0.5 * static_cast<double>(k.second) * cfg.units.hbar, ra, rb, delta});
      cmp.max_delta = std::max(cmp.max_delta, delta);
    }
  }
  cmp.unmatched += static_cast<std::size_t>(std::count(used_a.begin(), used_a.end(), false));
  return cmp;
}

}  // namespace spintorus
