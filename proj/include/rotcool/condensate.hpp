#pragma once

// Bogoliubov phonons of a homogeneous weakly interacting condensate in units
// hbar = c = xi = 1.

#include <cmath>
#include <sstream>

#include "rotcool/errors.hpp"
#include "rotcool/params.hpp"

namespace rotcool {

namespace detail {
inline void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be finite and >= 0, got " << v;
    throw Error(ErrorCategory::Domain, os.str());
  }
}
inline void require_positive_momentum(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    std::ostringstream os;
    os << "Bogoliubov weight needs k > 0, got " << k;
    throw Error(ErrorCategory::Domain, os.str());
  }
}
}  // namespace detail

/// omega_k = k sqrt(1 + k^2/2)
inline double dispersion(double k) {
  detail::require_nonnegative(k, "momentum");
  return k * std::sqrt(1.0 + 0.5 * k * k);
}

/// k(omega) = sqrt(sqrt(1 + 2 omega^2) - 1), evaluated without cancellation at small omega.
inline double inverse_dispersion(double omega) {
  detail::require_nonnegative(omega, "energy");
  const double s = std::sqrt(1.0 + 2.0 * omega * omega);
  return std::sqrt(2.0 * omega * omega / (s + 1.0));
}

/// dk/domega along the Bogoliubov branch, = sqrt(1 + k^2/2) / (1 + k^2).
/// Tends to 1 (= 1/c) as omega -> 0.
inline double dk_domega(double omega) {
  const double k = inverse_dispersion(omega);
  const double k2 = k * k;
  return std::sqrt(1.0 + 0.5 * k2) / (1.0 + k2);
}

/// d omega / dk at momentum k.
inline double group_velocity(double k) {
  detail::require_nonnegative(k, "momentum");
  const double k2 = k * k;
  return (1.0 + k2) / std::sqrt(1.0 + 0.5 * k2);
}

/// W_k = [k^2 / (2 + k^2)]^(1/4) = sqrt(eps_k / omega_k)
inline double w_factor(double k) {
  detail::require_positive_momentum(k);
  return std::sqrt(k / std::sqrt(2.0 + k * k));
}

/// W_k W_k' + (W_k W_k')^-1, scattering vertex weight.
inline double w_cross(double k, double kp) {
  const double w = w_factor(k) * w_factor(kp);
  return w + 1.0 / w;
}

/// W_k W_k' - (W_k W_k')^-1, pair creation/annihilation vertex weight.
inline double w_prec(double k, double kp) {
  const double w = w_factor(k) * w_factor(kp);
  return w - 1.0 / w;
}

/// Bose-Einstein occupation at energy omega and temperature T (k_B = 1).
/// Exactly 0 at T = 0 and for omega / T > 700.
inline double bose_occupation(double omega, double temperature) {
  if (!(omega > 0.0)) {
    std::ostringstream os;
    os << "thermal occupation needs omega > 0, got " << omega;
    throw Error(ErrorCategory::Domain, os.str());
  }
  if (temperature <= 0.0) return 0.0;
  const double x = omega / temperature;
  if (x > 700.0) return 0.0;
  return 1.0 / std::expm1(x);
}

inline double thermal_occupation(double omega, const SystemParams& p) {
  return bose_occupation(omega, derive_constants(p).T);
}

struct PhononMode {
  double k = 0.0;
  double omega = 0.0;

  static PhononMode from_momentum(double k) { return {k, dispersion(k)}; }
  static PhononMode from_energy(double omega) { return {inverse_dispersion(omega), omega}; }
};

}  // namespace rotcool
