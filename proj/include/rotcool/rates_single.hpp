#pragma once

// Single-phonon emission and absorption rates of a homo-nuclear rigid rotor.

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rotcool/condensate.hpp"
#include "rotcool/errors.hpp"
#include "rotcool/parallel.hpp"
#include "rotcool/params.hpp"
#include "rotcool/special_functions.hpp"

namespace rotcool {

/// Rigid-rotor levels E_j = j(j+1) B with B = 1/(4 m_I r_0^2).
struct RotorSpectrum {
  int jmax = 0;
  double B_rot = 0.0;
  std::vector<double> energies;

  double energy(int j) const { return casimir(j) * B_rot; }
  /// E_{jj'} = E_j - E_{j'}
  double transition_energy(int j, int jp) const { return (casimir(j) - casimir(jp)) * B_rot; }
  /// Delta_{jj'} = |j(j+1) - j'(j'+1)|
  static double delta(int j, int jp) { return std::abs(casimir(j) - casimir(jp)); }
  static double casimir(int j) { return static_cast<double>(j) * (j + 1.0); }
};

inline RotorSpectrum make_rotor_spectrum(const SystemParams& p, int jmax) {
  RotorSpectrum s;
  s.jmax = jmax;
  s.B_rot = derive_constants(p).B_rot;
  s.energies.resize(static_cast<std::size_t>(jmax) + 1);
  for (int j = 0; j <= jmax; ++j) s.energies[j] = s.energy(j);
  return s;
}

enum class Channel { OnePhononSpontaneous, OnePhononThermal, TwoPhononCross, TwoPhononPrec };

inline constexpr Channel kAllChannels[] = {Channel::OnePhononSpontaneous, Channel::OnePhononThermal,
                                           Channel::TwoPhononCross, Channel::TwoPhononPrec};

inline constexpr std::string_view channel_name(Channel c) noexcept {
  switch (c) {
    case Channel::OnePhononSpontaneous: return "1ph-sp";
    case Channel::OnePhononThermal: return "1ph-T";
    case Channel::TwoPhononCross: return "2ph-cross";
    case Channel::TwoPhononPrec: return "2ph-prec";
  }
  return "?";
}

inline Channel parse_channel(std::string_view s) {
  for (Channel c : kAllChannels)
    if (s == channel_name(c)) return c;
  if (s == "2ph-x" || s == "2ph-×") return Channel::TwoPhononCross;
  if (s == "2ph-≺") return Channel::TwoPhononPrec;
  throw Error(ErrorCategory::Config, "unknown channel '" + std::string(s) + "'");
}

/// Dense matrix of total rates Gamma_{j -> j'} for one channel, j, j' = 0..jmax.
struct ChannelRateMatrix {
  Channel channel = Channel::OnePhononSpontaneous;
  int jmax = 0;
  std::vector<double> gamma;  // row-major, row = initial j

  ChannelRateMatrix() = default;
  ChannelRateMatrix(Channel c, int jmax_)
      : channel(c), jmax(jmax_), gamma(static_cast<std::size_t>(jmax_ + 1) * (jmax_ + 1), 0.0) {}

  int size() const { return jmax + 1; }
  double operator()(int j, int jp) const { return gamma[static_cast<std::size_t>(j) * size() + jp]; }
  double& at(int j, int jp) { return gamma[static_cast<std::size_t>(j) * size() + jp]; }
};

namespace detail {

inline double transition_energy_abs(int j, int jp, const DerivedConstants& d) {
  if (j == jp) {
    std::ostringstream os;
    os << "no phonon carries zero energy: j = j' = " << j;
    throw Error(ErrorCategory::DegenerateTransition, os.str());
  }
  const double e = RotorSpectrum::delta(j, jp) * d.B_rot;
  if (!(e > 0.0)) {
    std::ostringstream os;
    os << "zero transition energy for j=" << j << " j'=" << jp;
    throw Error(ErrorCategory::DegenerateTransition, os.str());
  }
  return e;
}

// gamma_lambda without the Bessel factor:
// 4 g_IB^2 n_0 / (sqrt2 pi) * k^3 / sqrt(1 + 2 E^2), c = xi = 1.
inline double one_phonon_prefactor(double energy, const DerivedConstants& d) {
  const double k = inverse_dispersion(energy);
  return 4.0 * d.g_ib * d.g_ib * d.n0 / (std::numbers::sqrt2 * std::numbers::pi) * k * k * k /
         std::sqrt(1.0 + 2.0 * energy * energy);
}

// sum_lambda gamma_lambda (C^{lambda 0}_{j0,j'0})^2 over the even lambda window.
inline double one_phonon_angular_sum(int j, int jp, const DerivedConstants& d) {
  const double energy = transition_energy_abs(j, jp, d);
  const double k = inverse_dispersion(energy);
  const int lo = std::abs(j - jp);
  const int hi = j + jp;
  const auto bessel = spherical_bessel_sequence(hi, d.r0 * k);
  double sum = 0.0;
  for (int lam = lo + (lo % 2); lam <= hi; lam += 2) {
    const double c = clebsch_gordan_zero(j, jp, lam);
    sum += bessel[lam] * bessel[lam] * c * c;
  }
  return one_phonon_prefactor(energy, d) * sum;
}

}  // namespace detail

/// Single-phonon coupling U_lambda(k) = g_IB sqrt(8 n_0 / pi) k W_k j_lambda(k r_0), zero for odd lambda.
inline double single_phonon_coupling(int lambda, double k, const SystemParams& p) {
  if (lambda % 2 != 0) return 0.0;
  const auto d = derive_constants(p);
  return d.g_ib * std::sqrt(8.0 * d.n0 / std::numbers::pi) * k * w_factor(k) *
         spherical_bessel(lambda, k * d.r0);
}

/// Effective rate gamma_lambda^{jj'} for angular-momentum transfer lambda.
inline double effective_gamma(int lambda, int j, int jp, const SystemParams& p) {
  const auto d = derive_constants(p);
  const double energy = detail::transition_energy_abs(j, jp, d);
  if (lambda % 2 != 0) return 0.0;
  const double jl = spherical_bessel(lambda, d.r0 * inverse_dispersion(energy));
  return detail::one_phonon_prefactor(energy, d) * jl * jl;
}

/// Same rate from the golden-rule form (1/2) (dk/domega) U_lambda(k_omega)^2 at omega = |E_{jj'}|.
inline double effective_gamma_golden_rule(int lambda, int j, int jp, const SystemParams& p) {
  const auto d = derive_constants(p);
  const double energy = detail::transition_energy_abs(j, jp, d);
  const double u = single_phonon_coupling(lambda, inverse_dispersion(energy), p);
  return 0.5 * dk_domega(energy) * u * u;
}

struct OnePhononRate {
  double sp = 0.0;  ///< spontaneous emission (only j > j')
  double th = 0.0;  ///< thermally stimulated emission or absorption
  double total() const { return sp + th; }
};

/// Gamma_{jm -> j'm'} summed over the phonon projection; mu = m - m' by CG selection.
inline OnePhononRate rate_1ph_m_resolved(int j, int m, int jp, int mp, const SystemParams& p,
                                         const CGTable* table = nullptr) {
  const auto d = derive_constants(p);
  const double energy = detail::transition_energy_abs(j, jp, d);
  if (std::abs(m) > j || std::abs(mp) > jp) {
    std::ostringstream os;
    os << "projection out of range: j=" << j << " m=" << m << " j'=" << jp << " m'=" << mp;
    throw Error(ErrorCategory::Domain, os.str());
  }
  const int mu = m - mp;
  const int lo = std::max(std::abs(j - jp), std::abs(mu));
  const int hi = j + jp;
  OnePhononRate out;
  if (lo > hi) return out;
  const auto bessel = spherical_bessel_sequence(hi, d.r0 * inverse_dispersion(energy));
  double sum = 0.0;
  for (int lam = lo + (lo % 2); lam <= hi; lam += 2) {
    const double gc = table ? table->g(j, m, jp, mp, lam, mu) : g_coefficient(j, m, jp, mp, lam, mu);
    sum += bessel[lam] * bessel[lam] * gc * gc;
  }
  sum *= detail::one_phonon_prefactor(energy, d);
  out.sp = j > jp ? sum : 0.0;
  out.th = sum * bose_occupation(energy, d.T);
  return out;
}

/// m-independent total Gamma_{j -> j'} = (2j'+1) sum_lambda gamma_lambda (C^{lambda0}_{j0,j'0})^2.
inline OnePhononRate rate_1ph_total(int j, int jp, const SystemParams& p) {
  const auto d = derive_constants(p);
  const double base = (2.0 * jp + 1.0) * detail::one_phonon_angular_sum(j, jp, d);
  OnePhononRate out;
  out.sp = j > jp ? base : 0.0;
  out.th = base * bose_occupation(detail::transition_energy_abs(j, jp, d), d.T);
  return out;
}

/// Total spontaneous single-phonon decay rate Gamma_j = sum_{j'<j} Gamma_{j->j'}.
inline double total_decay_rate_1ph(int j, const SystemParams& p) {
  double sum = 0.0;
  for (int jp = j % 2; jp < j; jp += 2) sum += rate_1ph_total(j, jp, p).sp;
  return sum;
}

/// Closed form of gamma_lambda for r_0 << xi, where the emitted phonon is particle-like.
inline double rate_1ph_small_molecule(int lambda, int j, int jp, const SystemParams& p) {
  if (lambda % 2 != 0) return 0.0;
  validate(p);
  const double delta = RotorSpectrum::delta(j, jp);
  const double inv_ratio = 1.0 / p.mI_over_mB;
  const double arg = std::sqrt(0.5 * inv_ratio * delta);
  const double jl = spherical_bessel(lambda, arg);
  return 1.0 / std::numbers::pi * p.gIB_over_g * p.gIB_over_g / p.n0_xi3 / p.r0_over_xi *
         std::sqrt(inv_ratio * delta) * jl * jl;
}

/// Single-phonon rate matrix for Channel::OnePhononSpontaneous or OnePhononThermal.
inline ChannelRateMatrix assemble_single_phonon(const SystemParams& p, int jmax, Channel channel,
                                                int threads = 1) {
  if (channel != Channel::OnePhononSpontaneous && channel != Channel::OnePhononThermal)
    throw std::invalid_argument("assemble_single_phonon: not a single-phonon channel");
  const auto d = derive_constants(p);
  ChannelRateMatrix out(channel, jmax);
  if (channel == Channel::OnePhononThermal && d.T <= 0.0) return out;
  detail::parallel_for(jmax + 1, threads, [&](int j) {
    for (int jp = j % 2; jp <= jmax; jp += 2) {
      if (jp == j) continue;
      if (channel == Channel::OnePhononSpontaneous && jp > j) continue;
      double base;
      try {
        base = (2.0 * jp + 1.0) * detail::one_phonon_angular_sum(j, jp, d);
      } catch (const Error& e) {
        std::ostringstream os;
        os << "(j=" << j << ", j'=" << jp << ") " << e.what();
        throw Error(e.category(), os.str());
      }
      if (channel == Channel::OnePhononThermal)
        base *= bose_occupation(detail::transition_energy_abs(j, jp, d), d.T);
      out.at(j, jp) = base;
    }
  });
  return out;
}

}  // namespace rotcool
