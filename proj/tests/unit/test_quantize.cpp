#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include <spintorus/errors.hpp>
#include <spintorus/quantize.hpp>

#include "oracles.hpp"

using namespace spintorus;

namespace {

constexpr double kAlpha = oracle::alpha_default;

QuantumNumbers qn(int n_r, int l, int twice_m_s, int twice_spin = 1) { return {n_r, l, twice_m_s, twice_spin}; }

const Spectrum& ebk_spin_n4() {
  static const Spectrum s = enumerate_levels(4, coulomb_field(), Scheme::ebk_spin);
  return s;
}

}  // namespace

TEST(Scheme, NamesRoundTrip) {
  for (Scheme s : {Scheme::sommerfeld_old, Scheme::ebk_noswitch, Scheme::ebk_spin, Scheme::dirac_exact}) {
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  }
  EXPECT_EQ(to_string(Scheme::ebk_spin), "ebk-spin");
  EXPECT_THROW(parse_scheme("bohr"), std::invalid_argument);
}

TEST(QuantizedActions, OldQuantumConditionsWithoutCorrections) {
  const FieldConfig cfg = coulomb_field();
  const ActionPair a = quantized_actions(qn(2, 3, 0, 0), Corrections{}, cfg);
  EXPECT_EQ(a.I_r, 2.0);
  EXPECT_EQ(a.L, 3.0);
  EXPECT_THROW(quantized_actions(qn(0, 0, 0, 0), Corrections{}, cfg), NoBoundStateError);
}

TEST(QuantizedActions, KeplerCorrectionsShiftByHalfPlusMinusHalf) {
  const FieldConfig cfg = coulomb_field();
  const Corrections k = nominal_corrections(Scheme::dirac_exact);
  EXPECT_EQ(k.mu_r, 2.0);
  EXPECT_EQ(k.mu_L, 2.0);
  EXPECT_DOUBLE_EQ(k.alpha_r, 2.0 * oracle::pi);
  const ActionPair a = quantized_actions(qn(0, 1, -1), k, cfg);
  EXPECT_NEAR(a.I_r, 0.0, 1e-15);
  EXPECT_NEAR(a.L, 1.0, 1e-15);
  const ActionPair b = quantized_actions(qn(1, 0, +1), k, cfg);
  EXPECT_NEAR(b.I_r, 2.0, 1e-15);
  EXPECT_NEAR(b.L, 1.0, 1e-15);
}

TEST(QuantizedActions, RespectsHbar) {
  Units u;
  u.hbar = 2.5;
  u.charge = std::sqrt(kAlpha * u.hbar);
  const ActionPair a = quantized_actions(qn(1, 2, 0, 0), Corrections{}, coulomb_field(u));
  EXPECT_DOUBLE_EQ(a.I_r, 2.5);
  EXPECT_DOUBLE_EQ(a.L, 5.0);
}

TEST(Admissibility, SpinDownRequiresPositiveL) {
  for (int n_r = 0; n_r < 10; ++n_r) {
    EXPECT_FALSE(is_admissible(qn(n_r, 0, -1), Scheme::ebk_spin));
    EXPECT_TRUE(is_admissible(qn(n_r, 0, +1), Scheme::ebk_spin));
    EXPECT_TRUE(is_admissible(qn(n_r, 1, -1), Scheme::ebk_spin));
  }
  EXPECT_FALSE(is_admissible(qn(0, 0, 0, 0), Scheme::sommerfeld_old));
  EXPECT_FALSE(is_admissible(qn(0, 1, 1), Scheme::sommerfeld_old));
  EXPECT_FALSE(is_admissible(qn(-1, 1, -1), Scheme::ebk_spin));
  EXPECT_FALSE(is_admissible(qn(0, 1, 3), Scheme::ebk_spin));
  EXPECT_FALSE(is_admissible(qn(0, 1, 0), Scheme::ebk_spin));
  for (const auto& q : admissible_states(4, Scheme::ebk_spin)) EXPECT_FALSE(q.l == 0 && q.twice_m_s < 0);
}

TEST(ExactEnergy, ClosedFormExamples) {
  const FieldConfig cfg = coulomb_field();
  EXPECT_NEAR(exact_energy(0.0, 1.0, cfg), std::sqrt(1.0 - kAlpha * kAlpha), 1e-16);
  EXPECT_NEAR(exact_energy(0.0, 1.0, cfg), 0.999973374, 1e-9);
  EXPECT_NEAR(exact_energy(2.0, 3.0, coulomb_field(natural_units(1e-9))), 1.0, 1e-15);
  EXPECT_THROW(exact_energy(0.0, cfg.units.coupling(), cfg), NoBoundStateError);
  EXPECT_THROW(exact_energy(0.0, 0.5 * kAlpha, cfg), NoBoundStateError);
  // Against the Dirac formula with j = L/hbar - 1/2, n = (I_r + L)/hbar.
  for (int n = 1; n <= 5; ++n) {
    for (int k = 1; k <= n; ++k) {
      const double w = exact_excess_energy(n - k, k, cfg).value;
      EXPECT_NEAR(w / oracle::dirac_binding(n, k - 0.5, kAlpha), 1.0, 1e-13);
    }
  }
}

TEST(SolveLevel, GroundStateDiracExact) {
  const LevelRecord r = solve_level(qn(0, 1, -1), coulomb_field(), Scheme::dirac_exact);
  EXPECT_NEAR(r.E, std::sqrt(1.0 - kAlpha * kAlpha), 1e-15);
  EXPECT_EQ(r.multiplicity, 2);
  EXPECT_DOUBLE_EQ(r.principal, 1.0);
}

TEST(SolveLevel, OldQuantumEqualsSpinEbkForGroundState) {
  const FieldConfig cfg = coulomb_field();
  const LevelRecord a = solve_level(qn(0, 1, 0, 0), cfg, Scheme::sommerfeld_old);
  const LevelRecord b = solve_level(qn(0, 1, -1), cfg, Scheme::ebk_spin);
  EXPECT_LT(std::abs(a.E - b.E), 1e-10);
  EXPECT_NEAR(b.corrections.alpha_L, 2.0 * oracle::pi, 1e-6);
  EXPECT_EQ(b.corrections.mu_r, 2.0);
}

TEST(SolveLevel, BohrLimit) {
  Units u;
  u.light_speed = 1000.0;
  u.charge = std::sqrt(kAlpha);
  const FieldConfig cfg = coulomb_field(u);
  for (const auto& q : {qn(0, 1, -1), qn(1, 1, -1), qn(0, 2, +1), qn(2, 0, +1)}) {
    const LevelRecord r = solve_level(q, cfg, Scheme::ebk_spin);
    const double n = r.principal;
    EXPECT_NEAR(r.w.value / (-kAlpha * kAlpha / (2.0 * n * n)), 1.0, 1e-6);
  }
}

TEST(SolveLevel, QuadratureAgreesWithClosedFormUpToSix) {
  const FieldConfig cfg = coulomb_field();
  for (int n_r = 0; n_r <= 6; ++n_r) {
    for (int l = 1; n_r + l <= 6; ++l) {
      const LevelRecord r = solve_level(qn(n_r, l, 0, 0), cfg, Scheme::sommerfeld_old);
      EXPECT_NEAR(r.E / exact_energy(n_r, l, cfg), 1.0, 1e-9);
      EXPECT_NEAR(r.w.value / exact_excess_energy(n_r, l, cfg).value, 1.0, 1e-9);
    }
  }
}

TEST(SolveLevel, InadmissibleInputIsRejected) {
  EXPECT_THROW(solve_level(qn(0, 0, -1), coulomb_field(), Scheme::ebk_spin), std::invalid_argument);
}

TEST(SolveEnergy, InvertsRadialAction) {
  const FieldConfig cfg = coulomb_field();
  const ExcessEnergy w = solve_energy(1.3, 2.1, cfg);
  EXPECT_NEAR(radial_action(w, 2.1, cfg), 1.3, 1e-12);
  EXPECT_THROW(solve_energy(1.0, 0.5 * kAlpha, cfg), Error);
}

TEST(Spectrum, SchemeEquivalenceOnActions) {
  // ebk-spin (n_r, l, m_s) has the old-quantum actions (n_r + 1/2 + m_s, l + 1/2 + m_s).
  const FieldConfig cfg = coulomb_field();
  const Corrections k = nominal_corrections(Scheme::dirac_exact);
  for (const auto& q : admissible_states(6, Scheme::ebk_spin)) {
    const ActionPair a = quantized_actions(q, k, cfg);
    const int shift = (1 + q.twice_m_s) / 2;
    const ActionPair b = quantized_actions(qn(q.n_r + shift, q.l + shift, 0, 0), Corrections{}, cfg);
    EXPECT_EQ(a.I_r, b.I_r) << to_string(q);
    EXPECT_EQ(a.L, b.L) << to_string(q);
  }
}

TEST(Spectrum, SchemeEquivalenceOnEnergies) {
  const FieldConfig cfg = coulomb_field();
  const Spectrum old = enumerate_levels(4, cfg, Scheme::sommerfeld_old);
  const Comparison cmp = compare_spectra(old, ebk_spin_n4(), cfg);
  EXPECT_EQ(cmp.unmatched, 0u);
  EXPECT_EQ(cmp.rows.size(), ebk_spin_n4().levels.size());
  EXPECT_LE(cmp.max_delta, 1e-10);
}

TEST(Spectrum, EbkSpinMatchesDiracFormula) {
  const FieldConfig cfg = coulomb_field();
  ASSERT_TRUE(ebk_spin_n4().failures.empty());
  EXPECT_EQ(ebk_spin_n4().levels.size(), 16u);
  for (const auto& r : ebk_spin_n4().levels) {
    const int n = static_cast<int>(std::lround(r.principal));
    const double j = r.L - 0.5;
    EXPECT_NEAR(r.E / oracle::dirac_energy(n, j, kAlpha), 1.0, 1e-8);
    EXPECT_NEAR(r.w.value / oracle::dirac_binding(n, j, kAlpha), 1.0, 1e-8);
  }
}

TEST(Spectrum, MonotoneInRadialAndAngularIndex) {
  std::map<std::tuple<int, int, int>, double> E;
  for (const auto& r : ebk_spin_n4().levels) E[{r.qn.n_r, r.qn.l, r.qn.twice_m_s}] = r.E;
  for (const auto& [key, e] : E) {
    const auto [n_r, l, m] = key;
    if (auto it = E.find({n_r + 1, l, m}); it != E.end()) EXPECT_GT(it->second, e);
    if (auto it = E.find({n_r, l + 1, m}); it != E.end()) EXPECT_GT(it->second, e);
  }
}

TEST(Spectrum, DegeneracyPatternMatchesDirac) {
  const FieldConfig cfg = coulomb_field();
  const auto groups = group_levels(ebk_spin_n4().levels, cfg);
  // Identify each group with the (n, j) whose Dirac energy it matches.
  std::map<std::pair<int, int>, int> found;
  for (const auto& g : groups) {
    int matches = 0;
    for (int n = 1; n <= 4; ++n) {
      for (int twice_j = 1; twice_j <= 2 * n - 1; twice_j += 2) {
        if (std::abs(g.w.value / oracle::dirac_binding(n, 0.5 * twice_j, kAlpha) - 1.0) < 1e-9) {
          ++matches;
          found[{n, twice_j}] = g.degeneracy;
        }
      }
    }
    EXPECT_EQ(matches, 1);
  }
  for (int n = 1; n <= 4; ++n) {
    for (int twice_j = 1; twice_j <= 2 * n - 1; twice_j += 2) {
      ASSERT_TRUE(found.count({n, twice_j})) << n << " " << twice_j;
      EXPECT_EQ((found[{n, twice_j}]), oracle::dirac_degeneracy(n, 0.5 * twice_j)) << n << " " << twice_j;
    }
  }
  int total = 0;
  for (const auto& g : groups) total += g.degeneracy;
  EXPECT_EQ(total, 2 * (1 + 4 + 9 + 16));
}

TEST(Spectrum, GroundLevelIsTwoFold) {
  const auto groups = group_levels(ebk_spin_n4().levels, coulomb_field());
  ASSERT_FALSE(groups.empty());
  ASSERT_EQ(groups.front().members.size(), 1u);
  const auto& ground = ebk_spin_n4().levels[groups.front().members[0]];
  EXPECT_EQ(ground.qn, qn(0, 1, -1));
  EXPECT_EQ(groups.front().degeneracy, 2);
  // (0, 0, +1/2) has I_r = L = hbar: an n = 2 state.
  for (const auto& r : ebk_spin_n4().levels) {
    if (r.qn == qn(0, 0, +1)) EXPECT_NEAR(r.principal, 2.0, 1e-9);
  }
}

TEST(Spectrum, OutputOrderIndependentOfThreads) {
  const FieldConfig cfg = coulomb_field();
  EnumerateOptions opt;
  opt.threads = 3;
  const Spectrum par = enumerate_levels(3, cfg, Scheme::ebk_spin, opt);
  const Spectrum seq = enumerate_levels(3, cfg, Scheme::ebk_spin);
  ASSERT_EQ(par.levels.size(), seq.levels.size());
  for (std::size_t i = 0; i < seq.levels.size(); ++i) {
    EXPECT_EQ(par.levels[i].qn, seq.levels[i].qn);
    EXPECT_EQ(par.levels[i].E, seq.levels[i].E);
  }
}

TEST(Spectrum, EnergyCutoff) {
  const FieldConfig cfg = coulomb_field();
  const double between = 0.5 * (oracle::dirac_energy(2, 1.5, kAlpha) + oracle::dirac_energy(3, 0.5, kAlpha));
  const Spectrum s = enumerate_spectrum(between, cfg, Scheme::ebk_spin);
  EXPECT_TRUE(s.failures.empty());
  EXPECT_EQ(s.levels.size(), 4u);
  for (const auto& r : s.levels) EXPECT_LE(r.principal, 2.0 + 1e-12);
  EXPECT_THROW(enumerate_spectrum(1.0, cfg, Scheme::ebk_spin), std::invalid_argument);
  EXPECT_THROW(enumerate_levels(0, cfg, Scheme::ebk_spin), std::invalid_argument);
}

TEST(Spectrum, SpinOneIncludesSpinlessLevels) {
  const FieldConfig cfg = coulomb_field();
  EnumerateOptions opt;
  opt.twice_spin = 2;
  const Spectrum s = enumerate_levels(3, cfg, Scheme::ebk_spin, opt);
  const Spectrum spinless = enumerate_levels(3, cfg, Scheme::ebk_noswitch);
  std::set<int> ms;
  for (const auto& r : s.levels) ms.insert(r.qn.twice_m_s);
  EXPECT_EQ(ms, (std::set<int>{-2, 0, 2}));
  for (const auto& r : spinless.levels) {
    const auto it = std::find_if(s.levels.begin(), s.levels.end(), [&](const LevelRecord& x) {
      return x.qn.twice_m_s == 0 && x.qn.n_r == r.qn.n_r && x.qn.l == r.qn.l;
    });
    ASSERT_NE(it, s.levels.end());
    EXPECT_NEAR(it->E, r.E, 1e-14);
  }
}

TEST(Multiplicity, MagneticSublevelCounts) {
  const double two_pi = 2.0 * oracle::pi;
  EXPECT_EQ(magnetic_multiplicity(1.0, 0.5, two_pi), 2);
  EXPECT_EQ(magnetic_multiplicity(1.0, -0.5, two_pi), 2);
  EXPECT_EQ(magnetic_multiplicity(2.0, -0.5, two_pi), 4);
  EXPECT_EQ(magnetic_multiplicity(2.5, 0.0, 0.0), 5);
  EXPECT_EQ(magnetic_multiplicity(3.0, 0.0, 0.0), 5);
  for (int k = 1; k < 6; ++k) EXPECT_EQ(magnetic_multiplicity(k, 0.5, two_pi), 2 * k);
}

TEST(GroupLevels, ToleranceSeparatesFineStructure) {
  const FieldConfig cfg = coulomb_field();
  const auto tight = group_levels(ebk_spin_n4().levels, cfg, 1e-13);
  EXPECT_EQ(tight.size(), 10u);
  // A loose tolerance merges j levels of the same n.
  const auto loose = group_levels(ebk_spin_n4().levels, cfg, 1e-7);
  EXPECT_EQ(loose.size(), 4u);
  for (std::size_t i = 1; i < tight.size(); ++i) EXPECT_GT(tight[i].E, tight[i - 1].E);
}
