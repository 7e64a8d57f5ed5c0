#include <cmath>

#include <gtest/gtest.h>

#include "rotcool/kinetics.hpp"

using namespace rotcool;

namespace {
SystemParams macro(double t = 0.01) { return SystemParams{10.0, 1.25, t, 100.0, 1.0}; }
SystemParams micro(double t = 0.01) { return SystemParams{0.1, 2.0, t, 100.0, 1.0}; }

const std::vector<Channel> kOnePhonon{Channel::OnePhononSpontaneous, Channel::OnePhononThermal};

std::vector<double> linear_grid(double t_end, int n) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(t_end * i / (n - 1));
  return t;
}
}  // namespace

TEST(Generator, EmptyChannelSetIsZero) {
  const auto g = assemble_generator(macro(), 10, {});
  EXPECT_EQ(g.M.rows(), 11);
  EXPECT_TRUE(g.M.isZero(0.0));
  EXPECT_THROW(assemble_generator(macro(), 0, kOnePhonon), Error);
}

TEST(Generator, ConservativeWithParityBlocks) {
  const std::vector<Channel> all(std::begin(kAllChannels), std::end(kAllChannels));
  const auto g = assemble_generator(macro(), 30, all);
  EXPECT_EQ(g.channels.size(), 4u);
  EXPECT_LE(g.max_column_sum_error(), 1e-12);
  for (int a = 0; a <= 30; ++a)
    for (int b = 0; b <= 30; ++b) {
      if (a != b) {
        EXPECT_GE(g.M(a, b), 0.0);
      }
      if ((a + b) % 2 != 0) {
        EXPECT_EQ(g.M(a, b), 0.0);
      }
    }
}

TEST(Generator, CacheReusesMatrices) {
  RateMatrixCache cache;
  const auto a = assemble_generator(micro(), 8, kOnePhonon, {}, 1, &cache);
  EXPECT_EQ(cache.size(), 2u);
  const auto b = assemble_generator(micro(), 8, kOnePhonon, {}, 1, &cache);
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_EQ(a.M, b.M);
  assemble_generator(micro(0.02), 8, kOnePhonon, {}, 1, &cache);
  EXPECT_EQ(cache.size(), 4u);
}

TEST(Evolve, ZeroGeneratorKeepsState) {
  const auto g = assemble_generator(macro(), 6, {});
  auto p0 = PopulationVector::from_weights({0.1, 0.2, 0.3, 0.4, 0.0, 0.0, 0.0});
  const auto tr = evolve(p0, g, linear_grid(100.0, 5));
  for (const auto& s : tr.states) EXPECT_EQ(s.p, p0.p);
}

TEST(Evolve, GroundStateIsStableAtZeroTemperature) {
  const auto g = assemble_generator(micro(0.0), 8, {Channel::OnePhononSpontaneous});
  const auto tr = evolve(PopulationVector::delta(8, 0), g, {0.0, 1.0, 1e3, 1e9});
  for (const auto& s : tr.states) EXPECT_EQ(s.p, PopulationVector::delta(8, 0).p);
}

TEST(Evolve, ConservesProbabilityAndParity) {
  const std::vector<double> w{0.05, 0.1, 0.0, 0.2, 0.15, 0.0, 0.3, 0.0, 0.2, 0.0, 0.0, 0.0};
  for (const auto& p : {macro(), micro()}) {
    const auto g = assemble_generator(p, 11, kOnePhonon);
    const auto p0 = PopulationVector::from_weights(w);
    double even0 = 0.0;
    for (int j = 0; j <= 11; j += 2) even0 += p0.p[j];
    const auto tr = evolve(p0, g, {0.0, 1e-2, 1.0, 1e2, 1e4, 1e6, 1e8});
    for (const auto& s : tr.states) {
      EXPECT_NEAR(s.p.sum(), 1.0, 1e-9);
      EXPECT_GE(s.p.minCoeff(), 0.0);
      double even = 0.0;
      for (int j = 0; j <= 11; j += 2) even += s.p[j];
      EXPECT_NEAR(even, even0, 1e-9) << "t=" << s.time;
    }
  }
}

TEST(Evolve, StationaryStateIsFixedPoint) {
  const auto g = assemble_generator(micro(0.3), 6, kOnePhonon);
  const auto ss = steady_state(g, PopulationVector::delta(6, 4));
  const auto tr = evolve(ss.p, g, {0.0, 1.0, 1e3, 1e6});
  for (const auto& s : tr.states) EXPECT_LT((s.p - ss.p.p).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Evolve, MatchesSymmetrizedSpectralSolution) {
  // Detailed balance makes D^{-1/2} M D^{1/2} symmetric with D the Gibbs weights,
  // which gives an independent eigenvector solution to compare against.
  for (const auto& [p, jmax] : {std::pair{micro(0.5), 8}, std::pair{macro(0.01), 20}}) {
    const auto g = assemble_generator(p, jmax, kOnePhonon);
    const auto d = derive_constants(p);
    const int n = jmax + 1;
    Eigen::VectorXd half(n);
    for (int j = 0; j < n; ++j)
      half[j] = std::exp(0.5 * (std::log(2.0 * j + 1.0) - RotorSpectrum::casimir(j) * d.B_rot / d.T));
    Eigen::MatrixXd sym = half.asDiagonal().inverse() * g.M * half.asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    // One exact zero mode per parity sector; roundoff would otherwise grow as exp(1e-17 t).
    Eigen::VectorXd lambda = es.eigenvalues();
    const double big = lambda.cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i)
      if (std::abs(lambda[i]) < 1e-12 * big) lambda[i] = 0.0;
    std::vector<double> w(n, 0.0);
    w[jmax - 1] = 0.7;
    w[jmax - 4] = 0.3;
    const auto p0 = PopulationVector::from_weights(w);
    const std::vector<double> times{0.0, 1.0, 1e3, 1e6, 1e9, 1e15, 1e30};
    const auto tr = evolve(p0, g, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const Eigen::VectorXd decay = (lambda * times[i]).array().exp();
      const Eigen::VectorXd ref = half.asDiagonal() * (es.eigenvectors() * decay.asDiagonal() *
                                                       es.eigenvectors().transpose() *
                                                       (half.asDiagonal().inverse() * p0.p));
      EXPECT_LT((tr.states[i].p - ref).cwiseAbs().maxCoeff(), 1e-10) << "t=" << times[i] << " jmax=" << jmax;
    }
  }
}

TEST(Evolve, RejectsBadInput) {
  const auto g = assemble_generator(micro(), 4, kOnePhonon);
  PopulationVector bad;
  bad.p = Eigen::VectorXd::Constant(5, 0.5);
  EXPECT_THROW(evolve(bad, g, {0.0, 1.0}), Error);
  EXPECT_THROW(evolve(PopulationVector::delta(4, 2), g, {1.0, 0.5}), Error);
  EXPECT_THROW(evolve(PopulationVector::delta(3, 2), g, {0.0}), Error);
  EXPECT_THROW(PopulationVector::delta(4, 7), Error);
  EXPECT_THROW(PopulationVector::from_weights({0.0, 0.0}), Error);
}

TEST(Evolve, NonConservativeGeneratorRaisesStiffnessFailure) {
  Generator g;
  g.M = Eigen::MatrixXd::Zero(2, 2);
  g.M(0, 0) = -1.0;  // mass leaves the system
  try {
    evolve(PopulationVector::delta(1, 0), g, {0.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::StiffnessFailure);
  }
}

TEST(Evolve, TruncationLeakFlag) {
  const auto g = assemble_generator(micro(0.0), 10, kOnePhonon);
  EXPECT_TRUE(evolve(PopulationVector::delta(10, 10), g, {0.0, 1.0}).truncation_leak());
  EXPECT_FALSE(evolve(PopulationVector::delta(10, 2), g, {0.0, 1.0, 10.0}).truncation_leak());
}

TEST(SteadyState, AbsorbingGroundStatesAtZeroTemperature) {
  const auto g = assemble_generator(micro(0.0), 12, kOnePhonon);
  const auto even = steady_state(g, PopulationVector::delta(12, 8));
  EXPECT_EQ(even.nullity, 1);
  EXPECT_NEAR(even.p.p[0], 1.0, 1e-12);
  const auto odd = steady_state(g, PopulationVector::delta(12, 9));
  EXPECT_NEAR(odd.p.p[1], 1.0, 1e-12);
  EXPECT_FALSE(odd.non_unique());
}

TEST(SteadyState, MacroDimerHasManyAbsorbingStates) {
  // Below the Landau threshold the T = 0 single-phonon rates are tiny but not
  // exactly zero; a loose rank tolerance exposes the near-degenerate null space.
  const auto g = assemble_generator(macro(0.0), 30, kOnePhonon);
  const auto ss = steady_state(g, PopulationVector::delta(30, 24), 1e-6);
  EXPECT_GT(ss.nullity, 1);
  EXPECT_TRUE(ss.non_unique());
  EXPECT_NEAR(ss.p.p.sum(), 1.0, 1e-12);
}

TEST(SteadyState, ThermalFixedPointIsDegeneracyWeightedGibbs) {
  const auto p = micro(0.5);
  const auto g = assemble_generator(p, 8, kOnePhonon);
  const auto ss = steady_state(g, PopulationVector::delta(8, 6));
  EXPECT_EQ(ss.nullity, 1);
  const double scale = g.M.cwiseAbs().maxCoeff();
  EXPECT_LT((g.M * ss.p.p).cwiseAbs().maxCoeff(), 1e-10 * scale);
  const auto gibbs = gibbs_distribution(p, 8, Parity::Even);
  EXPECT_LT((ss.p.p - gibbs).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Kinetics, RelativeEntropyToGibbsNeverIncreases) {
  const auto p = micro(0.5);
  const auto g = assemble_generator(p, 8, kOnePhonon);
  const auto gibbs = gibbs_distribution(p, 8, Parity::Even);
  std::vector<double> t{0.0};
  for (double x = 1e-6; x < 1e12; x *= 1.5) t.push_back(x);
  const auto tr = evolve(PopulationVector::delta(8, 8), g, t);
  double prev = relative_entropy(tr.states[0].p, gibbs);
  for (const auto& s : tr.states) {
    const double h = relative_entropy(s.p, gibbs);
    EXPECT_LE(h, prev + 1e-12) << "t=" << s.time;
    prev = h;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(Diagnostics, Values) {
  Trajectory tr;
  tr.states.push_back(PopulationVector::delta(30, 24));
  tr.states.push_back(PopulationVector::from_weights({1, 1, 1, 1, 1}));
  const auto rows = diagnostics(tr, 10);
  EXPECT_DOUBLE_EQ(rows[0].mean_j, 24.0);
  EXPECT_DOUBLE_EQ(rows[0].mean_casimir, 600.0);
  EXPECT_EQ(rows[0].mass_below, 0.0);
  EXPECT_EQ(rows[0].entropy, 0.0);
  EXPECT_DOUBLE_EQ(rows[1].mean_j, 2.0);
  EXPECT_DOUBLE_EQ(rows[1].mass_below, 1.0);
  EXPECT_NEAR(rows[1].even_mass, 0.6, 1e-15);
  EXPECT_NEAR(rows[1].entropy, std::log(5.0), 1e-15);
  EXPECT_NEAR(rows[1].norm, 1.0, 1e-15);
}

TEST(Kinetics, MicroDimerCoolsToGround) {
  const auto g = assemble_generator(micro(0.01), 32, kOnePhonon);
  double slowest = 1e300;
  for (int j = 1; j <= 32; ++j)
    if (-g.M(j, j) > 0.0) slowest = std::min(slowest, -g.M(j, j));
  const auto tr = evolve(PopulationVector::delta(32, 24), g, {0.0, 10.0 / slowest});
  const auto last = diagnose(tr.states.back(), 0);
  EXPECT_GT(tr.states.back().p[0], 0.99);
  EXPECT_LT(last.mean_j, 0.05);
}
