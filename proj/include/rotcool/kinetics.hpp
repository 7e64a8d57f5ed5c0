#pragma once

// Linear Boltzmann equation dp_j/dt = sum_j' (p_j' Gamma_{j'->j} - p_j Gamma_{j->j'})
// for the j-resolved rotor populations.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "rotcool/errors.hpp"
#include "rotcool/params.hpp"
#include "rotcool/rates_single.hpp"
#include "rotcool/rates_two.hpp"

namespace rotcool {

/// Probabilities p_j, j = 0..jmax, at a given time.
struct PopulationVector {
  Eigen::VectorXd p;
  double time = 0.0;

  int jmax() const { return static_cast<int>(p.size()) - 1; }

  static PopulationVector delta(int jmax, int j0) {
    if (j0 < 0 || j0 > jmax) {
      std::ostringstream os;
      os << "initial level " << j0 << " outside 0.." << jmax;
      throw Error(ErrorCategory::Config, os.str());
    }
    PopulationVector v;
    v.p = Eigen::VectorXd::Zero(jmax + 1);
    v.p[j0] = 1.0;
    return v;
  }

  /// Normalizes nonnegative weights; the vector length fixes jmax.
  static PopulationVector from_weights(const std::vector<double>& w) {
    PopulationVector v;
    v.p = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    const double total = v.p.sum();
    if (v.p.size() == 0 || (v.p.array() < 0.0).any() || !(total > 0.0) || !std::isfinite(total))
      throw Error(ErrorCategory::Config, "initial weights must be nonnegative with a positive sum");
    v.p /= total;
    return v;
  }
};

/// Rate generator with M(j', j) = Gamma_{j->j'} off the diagonal and
/// M(j, j) = -sum_{j'} Gamma_{j->j'}, so that dp/dt = M p.
struct Generator {
  Eigen::MatrixXd M;
  std::vector<Channel> channels;

  int jmax() const { return static_cast<int>(M.rows()) - 1; }
  double max_column_sum_error() const {
    return M.size() == 0 ? 0.0 : M.colwise().sum().cwiseAbs().maxCoeff();
  }
};

inline Generator generator_from_rates(int jmax, const std::vector<ChannelRateMatrix>& rates) {
  Generator g;
  g.M = Eigen::MatrixXd::Zero(jmax + 1, jmax + 1);
  for (const auto& r : rates) {
    if (r.jmax != jmax) throw std::invalid_argument("generator_from_rates: jmax mismatch");
    g.channels.push_back(r.channel);
    for (int j = 0; j <= jmax; ++j)
      for (int jp = 0; jp <= jmax; ++jp)
        if (jp != j) g.M(jp, j) += r(j, jp);
  }
  // Diagonal last, from the summed off-diagonals, so columns cancel to roundoff.
  for (int j = 0; j <= jmax; ++j) {
    double out = 0.0;
    for (int jp = 0; jp <= jmax; ++jp)
      if (jp != j) out += g.M(jp, j);
    g.M(j, j) = -out;
  }
  return g;
}

inline ChannelRateMatrix assemble_channel(const SystemParams& p, int jmax, Channel c,
                                          const EtaQuadrature& q = {}, int threads = 1) {
  switch (c) {
    case Channel::OnePhononSpontaneous:
    case Channel::OnePhononThermal: return assemble_single_phonon(p, jmax, c, threads);
    case Channel::TwoPhononCross:
    case Channel::TwoPhononPrec: return assemble_two_phonon(p, jmax, c, q, threads);
  }
  throw std::invalid_argument("assemble_channel: unknown channel");
}

/// Memoized channel matrices, keyed by a fingerprint of everything that enters them.
class RateMatrixCache {
 public:
  const ChannelRateMatrix& get(const SystemParams& p, int jmax, Channel c, const EtaQuadrature& q = {},
                               int threads = 1) {
    const std::string key = fingerprint(p, jmax, c, q);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, assemble_channel(p, jmax, c, q, threads)).first;
    return it->second;
  }
  std::size_t size() const { return cache_.size(); }

  static std::string fingerprint(const SystemParams& p, int jmax, Channel c, const EtaQuadrature& q) {
    char buf[512];
    const bool two = c == Channel::TwoPhononCross || c == Channel::TwoPhononPrec;
    std::snprintf(buf, sizeof buf, "%a|%a|%a|%a|%a|%d|%d|%a|%a|%a|%u|%d", p.r0_over_xi, p.mI_over_mB,
                  p.T_over_Tc, p.n0_xi3, p.gIB_over_g, jmax, static_cast<int>(c), two ? q.rel_tol : 0.0,
                  two ? q.abs_tol : 0.0, two ? q.eta_max : 0.0, two ? q.max_depth : 0u,
                  two ? q.lambda_buffer : 0);
    return buf;
  }

 private:
  std::map<std::string, ChannelRateMatrix> cache_;
};

inline Generator assemble_generator(const SystemParams& p, int jmax, const std::vector<Channel>& channels,
                                    const EtaQuadrature& q = {}, int threads = 1,
                                    RateMatrixCache* cache = nullptr) {
  if (jmax < 1) throw Error(ErrorCategory::Config, "jmax must be >= 1");
  std::vector<ChannelRateMatrix> rates;
  for (Channel c : channels)
    rates.push_back(cache ? cache->get(p, jmax, c, q, threads) : assemble_channel(p, jmax, c, q, threads));
  return generator_from_rates(jmax, rates);
}

namespace detail {

// Clips negative roundoff and rescales columns to unit sum. Returns the
// largest deviation that had to be removed.
inline double restore_stochastic(Eigen::MatrixXd& E) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < E.cols(); ++c) {
    const double neg = E.col(c).minCoeff();
    if (neg < 0.0) worst = std::max(worst, -neg);
    E.col(c) = E.col(c).cwiseMax(0.0);
    const double sum = E.col(c).sum();
    worst = std::max(worst, std::abs(sum - 1.0));
    E.col(c) /= sum;
  }
  return worst;
}

}  // namespace detail

/// exp(M t) for a conservative generator M.
///
/// Scaling and squaring, with every squared factor mapped back onto
/// column-stochastic matrices; plain squaring doubles the column-sum error
/// at each step. `max_correction` receives the largest adjustment made.
inline Eigen::MatrixXd propagator(const Generator& g, double t, double* max_correction = nullptr) {
  const double norm = g.M.cwiseAbs().colwise().sum().maxCoeff() * t;
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  Eigen::MatrixXd E = (g.M * std::ldexp(t, -squarings)).exp();
  double worst = detail::restore_stochastic(E);
  for (int i = 0; i < squarings; ++i) {
    E = (E * E).eval();
    worst = std::max(worst, detail::restore_stochastic(E));
  }
  if (max_correction) *max_correction = worst;
  return E;
}

struct Trajectory {
  std::vector<PopulationVector> states;
  /// Largest population found in the two highest levels (truncation leak indicator).
  double max_top_mass = 0.0;

  static constexpr double kLeakThreshold = 1e-6;
  bool truncation_leak() const { return max_top_mass > kLeakThreshold; }
};

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kClipTolerance = 1e-12;

/// p(t) = exp(M t) p0 at every grid time.
///
/// Each point is computed directly from p0. Negatives down to -1e-12 are
/// clipped and the vector renormalized; anything worse, a norm drift above
/// 1e-9, or a propagator that needed a larger correction raises StiffnessFailure.
inline Trajectory evolve(const PopulationVector& p0, const Generator& g, const std::vector<double>& t_grid) {
  const auto n = g.M.rows();
  if (p0.p.size() != n) throw Error(ErrorCategory::Config, "initial state and generator sizes differ");
  if (std::abs(p0.p.sum() - 1.0) > kNormTolerance || (p0.p.array() < -kClipTolerance).any())
    throw Error(ErrorCategory::Config, "initial state is not a normalized distribution");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || !std::isfinite(t_grid[i]) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
      throw Error(ErrorCategory::Config, "time grid must be finite, nonnegative and increasing");
  }

  Trajectory traj;
  traj.states.reserve(t_grid.size());
  for (double t : t_grid) {
    PopulationVector s;
    s.time = t;
    if (t == 0.0) {
      s.p = p0.p;
    } else {
      double correction = 0.0;
      s.p = propagator(g, t, &correction) * p0.p;
      if (!(correction <= kNormTolerance)) {
        std::ostringstream os;
        os << "propagator at t=" << t << " needed a correction of " << correction;
        throw Error(ErrorCategory::StiffnessFailure, os.str());
      }
    }
    const double norm = s.p.sum();
    const double most_negative = s.p.minCoeff();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kNormTolerance || most_negative < -kClipTolerance) {
      std::ostringstream os;
      os << "propagation at t=" << t << " lost accuracy: norm-1 = " << norm - 1.0
         << ", min p = " << most_negative;
      throw Error(ErrorCategory::StiffnessFailure, os.str());
    }
    s.p = s.p.cwiseMax(0.0);
    s.p /= s.p.sum();
    if (n >= 2) traj.max_top_mass = std::max(traj.max_top_mass, s.p[n - 1] + s.p[n - 2]);
    traj.states.push_back(std::move(s));
  }
  return traj;
}

enum class Parity { Even, Odd };

struct SteadyState {
  PopulationVector p;
  int nullity = 0;  ///< largest null-space dimension among the seeded parity sectors
  bool non_unique() const { return nullity > 1; }
};

/// Normalized p with M p = 0 inside the parity sectors occupied by `seed`.
///
/// Singular values below rank_tol * max(sigma) count as null. When a sector
/// has several stationary states the result is the seed projected onto the
/// null space (or the first null vector if that projection is empty), and
/// `nullity` reports the dimension.
inline SteadyState steady_state(const Generator& g, const PopulationVector& seed, double rank_tol = 1e-10) {
  const int n = static_cast<int>(g.M.rows());
  if (seed.p.size() != n) throw Error(ErrorCategory::Config, "seed and generator sizes differ");

  bool couples_parities = false;
  for (int a = 0; a < n && !couples_parities; ++a)
    for (int b = 0; b < n; ++b)
      if ((a + b) % 2 != 0 && g.M(a, b) != 0.0) {
        couples_parities = true;
        break;
      }

  std::vector<std::vector<int>> sectors;
  if (couples_parities) {
    sectors.emplace_back(n);
    for (int i = 0; i < n; ++i) sectors[0][i] = i;
  } else {
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<int> idx;
      for (int i = parity; i < n; i += 2) idx.push_back(i);
      sectors.push_back(idx);
    }
  }

  SteadyState out;
  out.p.p = Eigen::VectorXd::Zero(n);
  for (const auto& idx : sectors) {
    const int m = static_cast<int>(idx.size());
    Eigen::VectorXd seed_s(m);
    for (int i = 0; i < m; ++i) seed_s[i] = seed.p[idx[i]];
    const double weight = seed_s.sum();
    if (m == 0 || weight <= 0.0) continue;

    Eigen::MatrixXd sub(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) sub(a, b) = g.M(idx[a], idx[b]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double cutoff = rank_tol * (sigma.size() ? sigma[0] : 0.0);
    std::vector<int> null_cols;
    for (int i = 0; i < m; ++i)
      if (sigma[i] <= cutoff) null_cols.push_back(i);
    out.nullity = std::max(out.nullity, static_cast<int>(null_cols.size()));
    if (null_cols.empty()) throw Error(ErrorCategory::NonUniqueSteadyState, "generator has no null vector");

    Eigen::MatrixXd basis(m, static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t c = 0; c < null_cols.size(); ++c) basis.col(c) = svd.matrixV().col(null_cols[c]);

    Eigen::VectorXd v;
    if (null_cols.size() == 1) {
      v = basis.col(0);
      if (v.sum() < 0.0) v = -v;
    } else {
      v = basis * (basis.transpose() * seed_s);
      if (!(v.cwiseMax(0.0).sum() > 0.0)) {
        v = basis.col(0);
        if (v.sum() < 0.0) v = -v;
      }
    }
    v = v.cwiseMax(0.0);
    v /= v.sum();
    for (int i = 0; i < m; ++i) out.p.p[idx[i]] = weight * v[i];
  }
  out.p.p /= out.p.p.sum();
  return out;
}

/// Degeneracy-weighted Gibbs distribution (2j+1) exp(-E_j / T) restricted to one parity.
inline Eigen::VectorXd gibbs_distribution(const SystemParams& params, int jmax, Parity parity) {
  const auto d = derive_constants(params);
  if (d.T <= 0.0) throw Error(ErrorCategory::Domain, "Gibbs distribution needs T > 0");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(jmax + 1);
  const int first = parity == Parity::Even ? 0 : 1;
  const double e0 = RotorSpectrum::casimir(first) * d.B_rot;
  for (int j = first; j <= jmax; j += 2)
    w[j] = (2.0 * j + 1.0) * std::exp(-(RotorSpectrum::casimir(j) * d.B_rot - e0) / d.T);
  return w / w.sum();
}

/// Kullback-Leibler divergence sum p ln(p / q) over the support of p.
inline double relative_entropy(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

struct DiagnosticsRow {
  double t = 0.0;
  double mean_j = 0.0;
  double mean_casimir = 0.0;  ///< <j(j+1)>
  double mass_below = 0.0;    ///< sum of p_j for j below the threshold level
  double even_mass = 0.0;
  double odd_mass = 0.0;
  double entropy = 0.0;       ///< -sum p ln p
  double norm = 0.0;
};

inline DiagnosticsRow diagnose(const PopulationVector& s, int threshold_j) {
  DiagnosticsRow r;
  r.t = s.time;
  for (Eigen::Index j = 0; j < s.p.size(); ++j) {
    const double pj = s.p[j];
    r.norm += pj;
    r.mean_j += static_cast<double>(j) * pj;
    r.mean_casimir += RotorSpectrum::casimir(static_cast<int>(j)) * pj;
    if (j < threshold_j) r.mass_below += pj;
    (j % 2 == 0 ? r.even_mass : r.odd_mass) += pj;
    if (pj > 0.0) r.entropy -= pj * std::log(pj);
  }
  return r;
}

/// Per-time summary; `threshold_j` is usually floor(j_c^(1)).
inline std::vector<DiagnosticsRow> diagnostics(const Trajectory& traj, int threshold_j) {
  std::vector<DiagnosticsRow> rows;
  rows.reserve(traj.states.size());
  for (const auto& s : traj.states) rows.push_back(diagnose(s, threshold_j));
  return rows;
}

}  // namespace rotcool
