#pragma once

// Dimensionless system parameters and the quantities derived from them.
//
// Units: hbar = c = xi = 1 (speed of sound and healing length), k_B = 1.
// Energies and rates are in c/xi, momenta in 1/xi, times in xi/c.

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "rotcool/errors.hpp"

namespace rotcool {

inline constexpr double kZeta32 = 2.612375348685488;  // Riemann zeta(3/2)

struct SystemParams {
  double r0_over_xi = 0.1;  ///< molecule half-size r_0 / xi
  double mI_over_mB = 2.0;  ///< impurity-atom mass over boson mass
  double T_over_Tc = 0.0;   ///< temperature in units of the ideal-gas T_c
  double n0_xi3 = 100.0;    ///< gas parameter n_0 xi^3
  double gIB_over_g = 1.0;  ///< impurity-boson over boson-boson coupling
};

enum class ParamStatus {
  Ok,
  /// n0_xi3 < 1: outside the weakly interacting regime, results are still produced.
  StronglyInteracting,
};

/// Throws InvalidParams on non-finite or non-positive fields (T_over_Tc may be 0).
inline ParamStatus validate(const SystemParams& p) {
  auto require_positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
      std::ostringstream os;
      os << name << " must be finite and > 0, got " << v;
      throw Error(ErrorCategory::InvalidParams, os.str());
    }
  };
  require_positive(p.r0_over_xi, "r0_over_xi");
  require_positive(p.mI_over_mB, "mI_over_mB");
  require_positive(p.n0_xi3, "n0_xi3");
  require_positive(p.gIB_over_g, "gIB_over_g");
  if (!std::isfinite(p.T_over_Tc) || p.T_over_Tc < 0.0) {
    std::ostringstream os;
    os << "T_over_Tc must be finite and >= 0, got " << p.T_over_Tc;
    throw Error(ErrorCategory::InvalidParams, os.str());
  }
  return p.n0_xi3 < 1.0 ? ParamStatus::StronglyInteracting : ParamStatus::Ok;
}

struct DerivedConstants {
  double c = 1.0;
  double xi = 1.0;
  double mB = 0.0;
  double mI = 0.0;
  double B_rot = 0.0;  ///< rotational constant 1/(4 m_I r_0^2)
  double zeta32 = kZeta32;
  double r0 = 0.0;
  double n0 = 0.0;     ///< condensate density in 1/xi^3
  double g = 0.0;      ///< boson-boson coupling, g n_0 = m_B c^2
  double g_ib = 0.0;
  double Tc = 0.0;     ///< ideal-gas critical temperature 2 pi n0^(2/3) / (m_B zeta(3/2)^(2/3))
  double T = 0.0;
};

inline DerivedConstants derive_constants(const SystemParams& p) {
  validate(p);
  DerivedConstants d;
  // xi = 1/sqrt(2 m_B g n_0) and c = sqrt(g n_0 / m_B) give m_B c xi = 1/sqrt(2).
  d.mB = 1.0 / std::numbers::sqrt2;
  d.mI = d.mB * p.mI_over_mB;
  d.r0 = p.r0_over_xi;
  d.B_rot = 1.0 / (4.0 * d.mI * d.r0 * d.r0);
  d.n0 = p.n0_xi3;
  d.g = d.mB / d.n0;
  d.g_ib = p.gIB_over_g * d.g;
  d.Tc = 2.0 * std::numbers::pi * std::cbrt(d.n0 * d.n0) / (d.mB * std::cbrt(kZeta32 * kZeta32));
  d.T = p.T_over_Tc * d.Tc;
  return d;
}

/// Nonnegative root of j(j+1) = rhs.
inline double angular_momentum_from_casimir(double rhs) {
  if (rhs <= 0.0) return 0.0;
  // 2 rhs / (1 + sqrt(1 + 4 rhs)) avoids cancellation for small rhs.
  return 2.0 * rhs / (1.0 + std::sqrt(1.0 + 4.0 * rhs));
}

/// Characteristic angular momentum of the thermal rotor distribution.
inline double thermal_angular_momentum(const SystemParams& p) {
  validate(p);
  const double r0_n13 = p.r0_over_xi * std::cbrt(p.n0_xi3);
  const double rhs = 8.0 * std::numbers::pi / std::cbrt(kZeta32 * kZeta32) * p.T_over_Tc *
                     p.mI_over_mB * r0_n13 * r0_n13;
  return angular_momentum_from_casimir(rhs);
}

struct CriticalMomenta {
  double jc = 0.0;   ///< Landau critical angular momentum
  double jc1 = 0.0;  ///< lowest angular momentum reachable by single-phonon decay
};

/// Real-valued thresholds; callers floor them where an integer level is needed.
inline CriticalMomenta critical_j(const SystemParams& p) {
  validate(p);
  const double ratio2 = p.mI_over_mB * p.mI_over_mB;
  const double r2 = p.r0_over_xi * p.r0_over_xi;
  CriticalMomenta out;
  out.jc = angular_momentum_from_casimir(2.0 * ratio2 * r2);
  out.jc1 = p.mI_over_mB > 1.0 ? angular_momentum_from_casimir(2.0 * r2 * (ratio2 - 1.0)) : 0.0;
  return out;
}

}  // namespace rotcool
