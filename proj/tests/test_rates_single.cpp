#include <cmath>

#include <gtest/gtest.h>

#include "rotcool/rates_single.hpp"

using namespace rotcool;

namespace {
SystemParams micro(double t = 0.0) { return SystemParams{0.1, 2.0, t, 100.0, 1.0}; }
SystemParams macro(double t = 0.0) { return SystemParams{10.0, 1.25, t, 100.0, 1.0}; }
}  // namespace

TEST(RotorSpectrum, Levels) {
  const auto s = make_rotor_spectrum(micro(), 10);
  EXPECT_EQ(s.energies[0], 0.0);
  for (int j = 1; j <= 10; ++j) EXPECT_GT(s.energies[j], s.energies[j - 1]);
  for (int j = 0; j <= 10; ++j)
    for (int jp = 0; jp <= 10; ++jp) {
      EXPECT_DOUBLE_EQ(s.transition_energy(j, jp), s.energies[j] - s.energies[jp]);
      EXPECT_DOUBLE_EQ(std::abs(s.transition_energy(j, jp)), RotorSpectrum::delta(j, jp) * s.B_rot);
    }
}

TEST(Channels, NamesRoundTrip) {
  for (Channel c : kAllChannels) EXPECT_EQ(parse_channel(channel_name(c)), c);
  EXPECT_EQ(parse_channel("2ph-x"), Channel::TwoPhononCross);
  EXPECT_THROW(parse_channel("3ph"), Error);
}

TEST(EffectiveGamma, OddLambdaAndDegenerate) {
  EXPECT_EQ(effective_gamma(3, 4, 2, micro()), 0.0);
  EXPECT_EQ(rate_1ph_small_molecule(1, 4, 2, micro()), 0.0);
  try {
    effective_gamma(2, 3, 3, micro());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::DegenerateTransition);
  }
  EXPECT_THROW(effective_gamma(1, 3, 3, micro()), Error);
}

TEST(EffectiveGamma, ReferenceValues) {
  EXPECT_NEAR(effective_gamma(2, 2, 0, micro()), 0.00043421070453017657898, 1e-12 * 4.34e-4);
  const SystemParams p{10.0, 1.25, 0.0, 100.0, 1.5};
  EXPECT_NEAR(effective_gamma(4, 6, 4, p), 5.8447235197224352552e-14, 1e-11 * 5.84e-14);
}

TEST(EffectiveGamma, DualFormAgreement) {
  for (const auto& p : {micro(), macro(), SystemParams{1e-3, 3.0, 0.0, 1e4, 0.7}})
    for (int j = 0; j <= 12; ++j)
      for (int jp = j % 2; jp < j; jp += 2)
        for (int lam = 0; lam <= j + jp; lam += 2) {
          const double a = effective_gamma(lam, j, jp, p);
          const double b = effective_gamma_golden_rule(lam, j, jp, p);
          EXPECT_NEAR(a, b, 1e-12 * std::abs(a) + 1e-300) << j << " " << jp << " " << lam;
        }
}

TEST(Rate1ph, MSumMatchesTotal) {
  for (const auto& p : {micro(0.05), macro(0.01)})
    for (int j = 0; j <= 6; ++j)
      for (int jp = 0; jp <= 6; ++jp) {
        if (j == jp) continue;
        const auto total = rate_1ph_total(j, jp, p);
        for (int m = -j; m <= j; ++m) {
          OnePhononRate sum;
          for (int mp = -jp; mp <= jp; ++mp) {
            const auto r = rate_1ph_m_resolved(j, m, jp, mp, p);
            sum.sp += r.sp;
            sum.th += r.th;
          }
          EXPECT_NEAR(sum.sp, total.sp, 1e-10 * total.sp + 1e-300) << j << " " << m << " -> " << jp;
          EXPECT_NEAR(sum.th, total.th, 1e-10 * total.th + 1e-300) << j << " " << m << " -> " << jp;
        }
      }
}

TEST(Rate1ph, CachedCoefficientsGiveSameRates) {
  CGTable table;
  table.populate(6, 12);
  table.freeze();
  const auto p = micro(0.05);
  for (int j = 0; j <= 6; ++j)
    for (int jp = 0; jp <= 6; ++jp) {
      if (j == jp) continue;
      for (int m = -j; m <= j; ++m)
        for (int mp = -jp; mp <= jp; ++mp) {
          const auto a = rate_1ph_m_resolved(j, m, jp, mp, p);
          const auto b = rate_1ph_m_resolved(j, m, jp, mp, p, &table);
          EXPECT_EQ(a.sp, b.sp);
          EXPECT_EQ(a.th, b.th);
        }
    }
}

TEST(Rate1ph, ZeroTemperatureUpwardVanishes) {
  for (int m = -1; m <= 1; ++m)
    for (int mp = -3; mp <= 3; ++mp) {
      const auto r = rate_1ph_m_resolved(1, m, 3, mp, micro());
      EXPECT_EQ(r.sp, 0.0);
      EXPECT_EQ(r.th, 0.0);
    }
  EXPECT_THROW(rate_1ph_m_resolved(1, 2, 3, 0, micro()), Error);
}

TEST(Rate1ph, TwoToZeroIsSingleQuadrupoleTerm) {
  const auto p = micro();
  const auto r = rate_1ph_m_resolved(2, 0, 0, 0, p);
  double brute = 0.0;
  for (int lam = 0; lam <= 50; ++lam)
    for (int mu = -lam; mu <= lam; ++mu) {
      const double g = g_coefficient(2, 0, 0, 0, lam, mu);
      if (g != 0.0) brute += effective_gamma(lam, 2, 0, p) * g * g;
    }
  EXPECT_NEAR(r.sp, brute, 1e-13 * brute);
  EXPECT_NEAR(r.sp, effective_gamma(2, 2, 0, p), 1e-13 * brute);
}

TEST(Rate1ph, LambdaWindowEqualsBruteForce) {
  for (const auto& p : {micro(), macro()})
    for (int j = 1; j <= 14; ++j)
      for (int jp = j % 2; jp < j; jp += 2) {
        double brute = 0.0;
        for (int lam = 0; lam <= 4 * (j + jp); ++lam) {
          const double c = clebsch_gordan(j, 0, jp, 0, lam, 0);
          if (c != 0.0) brute += effective_gamma(lam, j, jp, p) * c * c;
        }
        brute *= 2.0 * jp + 1.0;
        const double windowed = rate_1ph_total(j, jp, p).sp;
        EXPECT_NEAR(windowed, brute, 1e-12 * brute + 1e-300) << j << " -> " << jp;
      }
}

TEST(Rate1ph, ParityRule) {
  EXPECT_EQ(rate_1ph_total(3, 0, micro(0.1)).total(), 0.0);
  EXPECT_EQ(rate_1ph_total(2, 5, micro(0.1)).total(), 0.0);
}

TEST(Rate1ph, DetailedBalanceMResolved) {
  for (const auto& p : {micro(0.02), macro(0.01)}) {
    const auto d = derive_constants(p);
    for (int j = 1; j <= 5; ++j)
      for (int jp = j % 2; jp < j; jp += 2) {
        const double boltz = std::exp(-RotorSpectrum::delta(j, jp) * d.B_rot / d.T);
        for (int m = -j; m <= j; ++m)
          for (int mp = -jp; mp <= jp; ++mp) {
            const auto down = rate_1ph_m_resolved(j, m, jp, mp, p);
            const auto up = rate_1ph_m_resolved(jp, mp, j, m, p);
            if (down.total() == 0.0) {
              EXPECT_EQ(up.total(), 0.0);
              continue;
            }
            EXPECT_EQ(up.sp, 0.0);
            EXPECT_NEAR(up.th / down.total(), boltz, 1e-10 * boltz);
          }
      }
  }
}

TEST(Rate1ph, DetailedBalanceTotalsCarryDegeneracy) {
  const auto p = micro(0.02);
  const auto d = derive_constants(p);
  for (int j = 1; j <= 8; ++j)
    for (int jp = j % 2; jp < j; jp += 2) {
      const double boltz = std::exp(-RotorSpectrum::delta(j, jp) * d.B_rot / d.T);
      const double up = rate_1ph_total(jp, j, p).total();
      const double down = rate_1ph_total(j, jp, p).total();
      const double want = (2.0 * j + 1.0) / (2.0 * jp + 1.0) * boltz;
      EXPECT_NEAR(up / down, want, 1e-10 * want);
    }
}

TEST(Rate1ph, SmallMoleculeClosedForm) {
  const SystemParams p{1e-3, 2.0, 0.0, 100.0, 1.0};
  for (int j = 1; j <= 10; ++j)
    for (int jp = 0; jp < j; ++jp)
      for (int lam = 0; lam <= 10; lam += 2) {
        const double general = effective_gamma(lam, j, jp, p);
        const double closed = rate_1ph_small_molecule(lam, j, jp, p);
        EXPECT_NEAR(closed, general, 0.01 * general) << lam << " " << j << " " << jp;
      }
}

TEST(Rate1ph, SmallMoleculeRateOverBScalesWithSize) {
  const SystemParams a{1e-3, 2.0, 0.0, 100.0, 1.0};
  SystemParams b = a;
  b.r0_over_xi = 0.5e-3;
  const double ba = derive_constants(a).B_rot;
  const double bb = derive_constants(b).B_rot;
  for (int lam : {0, 2, 4}) {
    const double ra = rate_1ph_small_molecule(lam, 6, 2, a) / ba;
    const double rb = rate_1ph_small_molecule(lam, 6, 2, b) / bb;
    EXPECT_NEAR(rb, 0.5 * ra, 1e-12 * ra);
    const double ga = effective_gamma(lam, 6, 2, a) / ba;
    const double gb = effective_gamma(lam, 6, 2, b) / bb;
    EXPECT_NEAR(gb, 0.5 * ga, 0.02 * ga);
  }
}

TEST(AssembleSinglePhonon, StructureAndNormalMoleculeCoverage) {
  const auto p = micro(0.01);
  const auto sp = assemble_single_phonon(p, 20, Channel::OnePhononSpontaneous);
  const auto th = assemble_single_phonon(p, 20, Channel::OnePhononThermal, 3);
  for (int j = 0; j <= 20; ++j)
    for (int jp = 0; jp <= 20; ++jp) {
      EXPECT_GE(sp(j, jp), 0.0);
      EXPECT_GE(th(j, jp), 0.0);
      if (j == jp || (j + jp) % 2 != 0) {
        EXPECT_EQ(sp(j, jp), 0.0);
        EXPECT_EQ(th(j, jp), 0.0);
      } else if (jp > j) {
        EXPECT_EQ(sp(j, jp), 0.0);
      } else {
        EXPECT_GT(sp(j, jp), 0.0) << j << " -> " << jp;
        EXPECT_DOUBLE_EQ(sp(j, jp), rate_1ph_total(j, jp, p).sp);
      }
    }
  const auto cold = assemble_single_phonon(micro(), 6, Channel::OnePhononThermal);
  for (double v : cold.gamma) EXPECT_EQ(v, 0.0);
}

TEST(AssembleSinglePhonon, ThreadedMatchesSerial) {
  const auto p = macro(0.01);
  const auto a = assemble_single_phonon(p, 30, Channel::OnePhononThermal, 1);
  const auto b = assemble_single_phonon(p, 30, Channel::OnePhononThermal, 4);
  EXPECT_EQ(a.gamma, b.gamma);
}
