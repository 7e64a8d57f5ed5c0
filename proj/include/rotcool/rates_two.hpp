#pragma once

// Two-phonon rates: scattering of a phonon off the rotor (cross channel) and
// creation or annihilation of a phonon pair (prec channel).
//
// Both rates reduce to one-dimensional integrals over eta, the fraction of
// the transition energy |E_{jj'}| carried by the first phonon. The angular
// sums over (L, lambda, lambda') are folded into a weight matrix so that a
// single scalar integrand is integrated per (j, j') pair.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rotcool/condensate.hpp"
#include "rotcool/errors.hpp"
#include "rotcool/parallel.hpp"
#include "rotcool/params.hpp"
#include "rotcool/rates_single.hpp"
#include "rotcool/special_functions.hpp"

namespace rotcool {

struct EtaQuadrature {
  double rel_tol = 1e-8;
  /// Tail cutoff: the cross-channel integral stops where the occupation drops below abs_tol.
  double abs_tol = 1e-14;
  /// Upper limit of the cross-channel eta integral; <= 0 selects it from abs_tol.
  double eta_max = 0.0;
  unsigned max_depth = 30;
  /// Orders kept beyond ceil(r_0 k_max) in the lambda sums.
  int lambda_buffer = 12;
};

namespace detail {

inline void require_eta(double eta, double hi, const char* what) {
  if (!(eta > 0.0) || !(eta < hi)) {
    std::ostringstream os;
    os << what << " needs eta in (0, " << hi << "), got " << eta;
    throw Error(ErrorCategory::Domain, os.str());
  }
}

// omega k(omega) / sqrt(1 + 2 omega^2): energy-weighted density of states factor.
inline double energy_weight(double omega) {
  return omega * inverse_dispersion(omega) / std::sqrt(1.0 + 2.0 * omega * omega);
}

inline double sq(double x) { return x * x; }

}  // namespace detail

/// gamma^x_{lambda lambda'; j j'}(eta): the absorbed phonon has energy eta |E|,
/// the emitted one (eta + 1) |E|.
inline double kernel_cross(int lambda, int lambdap, int j, int jp, double eta, const SystemParams& p) {
  const auto d = derive_constants(p);
  const double e = detail::transition_energy_abs(j, jp, d);
  detail::require_eta(eta, std::numeric_limits<double>::infinity(), "kernel_cross");
  if ((lambda + lambdap) % 2 != 0) return 0.0;
  const double w1 = eta * e;
  const double w2 = (eta + 1.0) * e;
  const double k1 = inverse_dispersion(w1);
  const double k2 = inverse_dispersion(w2);
  const double pref = d.g_ib * d.g_ib / (2.0 * std::pow(std::numbers::pi, 3)) * e;
  return pref * detail::energy_weight(w1) * detail::energy_weight(w2) *
         detail::sq(spherical_bessel(lambda, d.r0 * k1)) *
         detail::sq(spherical_bessel(lambdap, d.r0 * k2)) * detail::sq(w_cross(k1, k2));
}

/// Two-phonon vertex U^mu_{lambda lambda'}(k, k') = (2 g_IB / pi) k k' j_lambda(k r0) j_lambda'(k' r0) W^mu.
inline double two_phonon_coupling(int lambda, int lambdap, double k, double kp, double w_mu,
                                  const SystemParams& p) {
  if ((lambda + lambdap) % 2 != 0) return 0.0;
  const auto d = derive_constants(p);
  return 2.0 * d.g_ib / std::numbers::pi * k * kp * spherical_bessel(lambda, k * d.r0) *
         spherical_bessel(lambdap, kp * d.r0) * w_mu;
}

/// Golden-rule form (|E| / 8 pi) (dk/domega)|_{eta E} (dk/domega)|_{(eta+1) E} [U^x]^2.
inline double kernel_cross_golden_rule(int lambda, int lambdap, int j, int jp, double eta,
                                       const SystemParams& p) {
  const auto d = derive_constants(p);
  const double e = detail::transition_energy_abs(j, jp, d);
  detail::require_eta(eta, std::numeric_limits<double>::infinity(), "kernel_cross_golden_rule");
  const double k1 = inverse_dispersion(eta * e);
  const double k2 = inverse_dispersion((eta + 1.0) * e);
  const double u = two_phonon_coupling(lambda, lambdap, k1, k2, w_cross(k1, k2), p);
  return e / (8.0 * std::numbers::pi) * dk_domega(eta * e) * dk_domega((eta + 1.0) * e) * u * u;
}

/// gamma^prec_{lambda lambda'; j j'}(eta): the two phonons share |E| as eta and 1 - eta.
inline double kernel_prec(int lambda, int lambdap, int j, int jp, double eta, const SystemParams& p) {
  const auto d = derive_constants(p);
  const double e = detail::transition_energy_abs(j, jp, d);
  detail::require_eta(eta, 1.0, "kernel_prec");
  if ((lambda + lambdap) % 2 != 0) return 0.0;
  const double w1 = eta * e;
  const double w2 = (1.0 - eta) * e;
  const double k1 = inverse_dispersion(w1);
  const double k2 = inverse_dispersion(w2);
  const double pref = d.g_ib * d.g_ib / (4.0 * std::pow(std::numbers::pi, 3)) * e;
  return pref * detail::energy_weight(w1) * detail::energy_weight(w2) *
         detail::sq(spherical_bessel(lambda, d.r0 * k1)) *
         detail::sq(spherical_bessel(lambdap, d.r0 * k2)) * detail::sq(w_prec(k1, k2));
}

/// Golden-rule form of the pair kernel; the 1/2 of the pair vertex gives |E| / 16 pi.
inline double kernel_prec_golden_rule(int lambda, int lambdap, int j, int jp, double eta,
                                      const SystemParams& p) {
  const auto d = derive_constants(p);
  const double e = detail::transition_energy_abs(j, jp, d);
  detail::require_eta(eta, 1.0, "kernel_prec_golden_rule");
  const double k1 = inverse_dispersion(eta * e);
  const double k2 = inverse_dispersion((1.0 - eta) * e);
  const double u = two_phonon_coupling(lambda, lambdap, k1, k2, w_prec(k1, k2), p);
  return e / (16.0 * std::numbers::pi) * dk_domega(eta * e) * dk_domega((1.0 - eta) * e) * u * u;
}

/// Angular weights A[lambda][lambda'] =
///   (2j'+1) sum_{L even} (2 lambda+1)(2 lambda'+1)/(2L+1) (C^{L0}_{lambda'0,lambda0})^2 (C^{L0}_{j0,j'0})^2
/// for lambda, lambda' <= lambda_max, stored row-major.
inline std::vector<double> two_phonon_angular_weights(int j, int jp, int lambda_max) {
  const int n = lambda_max + 1;
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  const int l_lo = std::abs(j - jp);
  const int l_hi = j + jp;
  for (int lam = 0; lam <= lambda_max; ++lam) {
    for (int lamp = lam % 2; lamp <= lambda_max; lamp += 2) {
      const int lo = std::max(l_lo, std::abs(lam - lamp));
      const int hi = std::min(l_hi, lam + lamp);
      double sum = 0.0;
      for (int L = lo + (lo % 2); L <= hi; L += 2) {
        const double c1 = clebsch_gordan_zero(lamp, lam, L);
        const double c2 = clebsch_gordan_zero(j, jp, L);
        sum += c1 * c1 * c2 * c2 / (2.0 * L + 1.0);
      }
      a[static_cast<std::size_t>(lam) * n + lamp] =
          (2.0 * jp + 1.0) * (2.0 * lam + 1.0) * (2.0 * lamp + 1.0) * sum;
    }
  }
  return a;
}

/// Upper limit of the cross-channel eta integral.
inline double cross_eta_max(double energy, double temperature, const EtaQuadrature& q) {
  if (q.eta_max > 0.0) return q.eta_max;
  const double cutoff = temperature * std::log1p(1.0 / q.abs_tol) / energy;
  return std::min(cutoff, 50.0 * temperature / energy + 10.0);
}

namespace detail {

template <class F>
double integrate_panels(F&& f, const std::vector<double>& breaks, const EtaQuadrature& q,
                        const char* what) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  double total_err = 0.0;
  double total_l1 = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double err = 0.0;
    double l1 = 0.0;
    total += gauss_kronrod<double, 31>::integrate(f, breaks[i], breaks[i + 1], q.max_depth,
                                                  q.rel_tol, &err, &l1);
    total_err += err;
    total_l1 += l1;
  }
  const bool converged =
      total_err <= 2.0 * q.rel_tol * std::abs(total) || total_err <= 1e-300;
  if (!std::isfinite(total) || !converged) {
    std::ostringstream os;
    os << what << ": error estimate " << total_err << " exceeds rel_tol " << q.rel_tol
       << " of |I| = " << total << " (L1 " << total_l1 << ")";
    throw Error(ErrorCategory::QuadratureFailure, os.str());
  }
  return total;
}

// Panel boundaries: the occupation factors vary on the scale T / |E|.
inline std::vector<double> thermal_breaks(double lo, double hi, double thermal_scale) {
  std::vector<double> b{lo};
  if (thermal_scale > 0.0)
    for (double s : {0.1, 1.0, 5.0}) {
      const double x = lo + s * thermal_scale;
      if (x > b.back() && x < hi) b.push_back(x);
    }
  b.push_back(hi);
  return b;
}

struct TwoPhononSetup {
  double energy = 0.0;
  double temperature = 0.0;
  double r0 = 0.0;
  int lambda_max = 0;
  std::vector<double> weights;
};

inline TwoPhononSetup two_phonon_setup(int j, int jp, double max_phonon_energy_fraction,
                                       const DerivedConstants& d, const EtaQuadrature& q,
                                       bool absorbed_s_wave_only) {
  TwoPhononSetup s;
  s.energy = transition_energy_abs(j, jp, d);
  s.temperature = d.T;
  s.r0 = d.r0;
  const double k_max = inverse_dispersion(max_phonon_energy_fraction * s.energy);
  s.lambda_max = std::max(j + jp, static_cast<int>(std::ceil(d.r0 * k_max)) + q.lambda_buffer);
  s.weights = two_phonon_angular_weights(j, jp, s.lambda_max);
  if (absorbed_s_wave_only) {
    const int n = s.lambda_max + 1;
    for (int lam = 1; lam < n; ++lam)
      for (int lamp = 0; lamp < n; ++lamp) s.weights[static_cast<std::size_t>(lam) * n + lamp] = 0.0;
  }
  return s;
}

// sum_{lambda lambda'} A j_lambda(x1)^2 j_lambda'(x2)^2
inline double angular_contraction(const TwoPhononSetup& s, double x1, double x2) {
  const auto b1 = spherical_bessel_sequence(s.lambda_max, x1);
  const auto b2 = spherical_bessel_sequence(s.lambda_max, x2);
  const int n = s.lambda_max + 1;
  double total = 0.0;
  for (int lam = 0; lam < n; ++lam) {
    const double a2 = b1[lam] * b1[lam];
    if (a2 == 0.0) continue;
    double row = 0.0;
    const double* w = &s.weights[static_cast<std::size_t>(lam) * n];
    for (int lamp = lam % 2; lamp < n; lamp += 2) row += w[lamp] * b2[lamp] * b2[lamp];
    total += a2 * row;
  }
  return total;
}

inline double two_phonon_cross(int j, int jp, const DerivedConstants& d, const EtaQuadrature& q,
                               bool absorbed_s_wave_only) {
  if (d.T <= 0.0) {
    transition_energy_abs(j, jp, d);
    return 0.0;  // [nbar + Theta_{j'j}] [nbar + Theta_{jj'}] vanishes identically
  }
  const double e = transition_energy_abs(j, jp, d);
  const double eta_max = cross_eta_max(e, d.T, q);
  const auto s = two_phonon_setup(j, jp, eta_max + 1.0, d, q, absorbed_s_wave_only);
  const double theta_down = j > jp ? 1.0 : 0.0;
  const double theta_up = 1.0 - theta_down;
  const double pref = d.g_ib * d.g_ib / (2.0 * std::pow(std::numbers::pi, 3)) * e;
  auto integrand = [&](double eta) {
    if (eta <= 0.0) return 0.0;
    const double w1 = eta * e;
    const double w2 = (eta + 1.0) * e;
    const double n1 = bose_occupation(w1, s.temperature);
    const double n2 = bose_occupation(w2, s.temperature);
    const double occ = (n1 + theta_up) * (n2 + theta_down);
    if (occ == 0.0) return 0.0;
    const double k1 = inverse_dispersion(w1);
    const double k2 = inverse_dispersion(w2);
    return pref * energy_weight(w1) * energy_weight(w2) * sq(w_cross(k1, k2)) *
           angular_contraction(s, s.r0 * k1, s.r0 * k2) * occ;
  };
  return integrate_panels(integrand, thermal_breaks(0.0, eta_max, s.temperature / e), q,
                          "two-phonon cross rate");
}

inline double two_phonon_prec(int j, int jp, const DerivedConstants& d, const EtaQuadrature& q) {
  const double e = transition_energy_abs(j, jp, d);
  const double theta = j > jp ? 1.0 : 0.0;
  if (d.T <= 0.0 && theta == 0.0) return 0.0;
  const auto s = two_phonon_setup(j, jp, 1.0, d, q, false);
  const double pref = d.g_ib * d.g_ib / (4.0 * std::pow(std::numbers::pi, 3)) * e;
  auto integrand = [&](double eta) {
    if (eta <= 0.0 || eta >= 1.0) return 0.0;
    const double w1 = eta * e;
    const double w2 = (1.0 - eta) * e;
    const double occ = (bose_occupation(w1, s.temperature) + theta) *
                       (bose_occupation(w2, s.temperature) + theta);
    if (occ == 0.0) return 0.0;
    const double k1 = inverse_dispersion(w1);
    const double k2 = inverse_dispersion(w2);
    return pref * energy_weight(w1) * energy_weight(w2) * sq(w_prec(k1, k2)) *
           angular_contraction(s, s.r0 * k1, s.r0 * k2) * occ;
  };
  // Symmetric panels about eta = 1/2 resolve the occupation near both ends.
  std::vector<double> breaks{0.0};
  const double ts = s.temperature / e;
  for (double f : {0.1, 1.0, 5.0})
    if (f * ts < 0.25) breaks.push_back(f * ts);
  const std::vector<double> lower = breaks;
  breaks.push_back(0.5);
  for (auto it = lower.rbegin(); it != lower.rend(); ++it) breaks.push_back(1.0 - *it);
  return integrate_panels(integrand, breaks, q, "two-phonon pair rate");
}

}  // namespace detail

/// Gamma^x_{j -> j'}: one phonon absorbed, one emitted. Exactly zero at T = 0.
inline double rate_2ph_cross(int j, int jp, const SystemParams& p, const EtaQuadrature& q = {}) {
  return detail::two_phonon_cross(j, jp, derive_constants(p), q, false);
}

/// Cross rate restricted to lambda = 0 for the absorbed phonon.
inline double rate_2ph_cross_absorbed_s_wave(int j, int jp, const SystemParams& p,
                                             const EtaQuadrature& q = {}) {
  return detail::two_phonon_cross(j, jp, derive_constants(p), q, true);
}

/// Gamma^prec_{j -> j'}: a phonon pair is emitted (j > j') or absorbed (j < j').
inline double rate_2ph_prec(int j, int jp, const SystemParams& p, const EtaQuadrature& q = {}) {
  return detail::two_phonon_prec(j, jp, derive_constants(p), q);
}

/// Gamma^{2ph,T} / Gamma^{1ph,sp} for r_0 << xi:
/// (sqrt2 / 4 pi^2) (1 / n0 xi^3) int_0^inf dkappa k(kappa) nbar(kappa).
inline double thermal_2ph_ratio(const SystemParams& p, const EtaQuadrature& q = {}) {
  const auto d = derive_constants(p);
  if (d.T <= 0.0) return 0.0;
  const double kappa_max = d.T * std::log1p(1.0 / q.abs_tol);
  auto integrand = [&](double kappa) {
    if (kappa <= 0.0) return 0.0;
    return inverse_dispersion(kappa) * bose_occupation(kappa, d.T);
  };
  const double integral =
      detail::integrate_panels(integrand, detail::thermal_breaks(0.0, kappa_max, d.T), q,
                               "thermal two-phonon ratio");
  return std::numbers::sqrt2 / (4.0 * std::numbers::pi * std::numbers::pi) / d.n0 * integral;
}

/// Two-phonon rate matrix for Channel::TwoPhononCross or TwoPhononPrec.
inline ChannelRateMatrix assemble_two_phonon(const SystemParams& p, int jmax, Channel channel,
                                             const EtaQuadrature& q = {}, int threads = 1) {
  if (channel != Channel::TwoPhononCross && channel != Channel::TwoPhononPrec)
    throw std::invalid_argument("assemble_two_phonon: not a two-phonon channel");
  const auto d = derive_constants(p);
  ChannelRateMatrix out(channel, jmax);
  if (channel == Channel::TwoPhononCross && d.T <= 0.0) return out;
  detail::parallel_for(jmax + 1, threads, [&](int j) {
    for (int jp = j % 2; jp <= jmax; jp += 2) {
      if (jp == j) continue;
      try {
        out.at(j, jp) = channel == Channel::TwoPhononCross ? detail::two_phonon_cross(j, jp, d, q, false)
                                                           : detail::two_phonon_prec(j, jp, d, q);
      } catch (const Error& e) {
        std::ostringstream os;
        os << "(j=" << j << ", j'=" << jp << ") " << e.what();
        throw Error(e.category(), os.str());
      }
    }
  });
  return out;
}

}  // namespace rotcool
