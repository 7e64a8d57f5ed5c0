#pragma once

// Spherical Bessel functions and angular-momentum coupling coefficients for
// integer quantum numbers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <vector>

#include "rotcool/errors.hpp"

namespace rotcool {

namespace detail {

inline void require_bessel_domain(int l, double x) {
  if (l < 0 || !(x >= 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << "spherical Bessel needs l >= 0 and finite x >= 0, got l=" << l << " x=" << x;
    throw Error(ErrorCategory::Domain, os.str());
  }
}

// Power series, used for small arguments where the closed forms cancel.
inline double spherical_bessel_series(int l, double x) {
  double pref = 1.0;
  for (int i = 1; i <= l; ++i) pref *= x / (2.0 * i + 1.0);
  const double half_x2 = 0.5 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= -half_x2 / (k * (2.0 * l + 2.0 * k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return pref * sum;
}

inline double j0_closed(double x) { return std::sin(x) / x; }
inline double j1_closed(double x) { return (std::sin(x) / x - std::cos(x)) / x; }

}  // namespace detail

/// j_l(x) for l = 0..lmax.
///
/// Upward recurrence from the closed forms of j_0 and j_1 is used while
/// l <= x, where it is stable. Orders above x come from Miller's downward
/// recurrence, matched to the upward values at the junction (or to j_0 when
/// x < 1).
inline std::vector<double> spherical_bessel_sequence(int lmax, double x) {
  detail::require_bessel_domain(lmax, x);
  std::vector<double> out(static_cast<std::size_t>(lmax) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (x < 0.5 && lmax <= 2) {
    for (int l = 0; l <= lmax; ++l) out[l] = detail::spherical_bessel_series(l, x);
    return out;
  }

  // Orders 0..m are computed upward. m = 0 below x = 1, where j_1 loses digits.
  const int m = x < 1.0 ? 0 : std::min(lmax, static_cast<int>(std::floor(x)));
  out[0] = detail::j0_closed(x);
  if (m >= 1) {
    out[1] = detail::j1_closed(x);
    for (int l = 1; l < m; ++l) out[l + 1] = (2.0 * l + 1.0) / x * out[l] - out[l - 1];
  }
  if (m == lmax) return out;

  const int start = lmax + static_cast<int>(std::sqrt(40.0 * (lmax + 1))) + 16;
  std::vector<double> f(static_cast<std::size_t>(start) + 2, 0.0);
  f[start] = 1e-300;
  constexpr double kBig = 1e200;
  for (int l = start; l >= 1; --l) {
    f[l - 1] = (2.0 * l + 1.0) / x * f[l] - f[l + 1];
    if (std::abs(f[l - 1]) > kBig) {
      for (int i = l - 1; i <= start; ++i) f[i] /= kBig;
    }
  }

  // Work relative to the junction magnitude so the match cannot overflow.
  double norm;
  double coef;
  if (m == 0) {
    norm = f[0];
    coef = out[0];
  } else {
    // Least-squares match on orders m-1 and m; consecutive orders never vanish together.
    norm = std::max(std::abs(f[m - 1]), std::abs(f[m]));
    const double a = f[m - 1] / norm;
    const double b = f[m] / norm;
    coef = (out[m - 1] * a + out[m] * b) / (a * a + b * b);
  }
  for (int l = m + 1; l <= lmax; ++l) out[l] = f[l] / norm * coef;
  return out;
}

/// Spherical Bessel function of the first kind j_l(x), x >= 0.
inline double spherical_bessel(int l, double x) {
  detail::require_bessel_domain(l, x);
  if (x == 0.0) return l == 0 ? 1.0 : 0.0;
  if (l <= 2) {
    if (x < 0.5) return detail::spherical_bessel_series(l, x);
    const double s = std::sin(x);
    const double c = std::cos(x);
    switch (l) {
      case 0: return s / x;
      case 1: return (s / x - c) / x;
      default: return ((3.0 / (x * x) - 1.0) * s / x) - 3.0 * c / (x * x);
    }
  }
  return spherical_bessel_sequence(l, x)[l];
}

namespace detail {

// ln(n!) from a table for moderate n.
inline long double log_factorial(int n) {
  static const std::vector<long double> table = [] {
    std::vector<long double> t(4097);
    for (int i = 0; i <= 4096; ++i) t[i] = std::lgamma(static_cast<long double>(i) + 1.0L);
    return t;
  }();
  if (n < 0) return 0.0L;
  if (n < static_cast<int>(table.size())) return table[n];
  return std::lgamma(static_cast<long double>(n) + 1.0L);
}

inline bool triangle(int a, int b, int c) { return c >= std::abs(a - b) && c <= a + b; }

}  // namespace detail

/// <j1 0 j2 0 | J 0> via the closed form of the all-zero 3j symbol.
inline double clebsch_gordan_zero(int j1, int j2, int J) {
  if (j1 < 0 || j2 < 0 || J < 0 || !detail::triangle(j1, j2, J)) return 0.0;
  const int two_g = j1 + j2 + J;
  if (two_g % 2 != 0) return 0.0;
  const int g = two_g / 2;
  using detail::log_factorial;
  const long double log_mag =
      0.5L * (log_factorial(two_g - 2 * j1) + log_factorial(two_g - 2 * j2) +
              log_factorial(two_g - 2 * J) - log_factorial(two_g + 1)) +
      log_factorial(g) - log_factorial(g - j1) - log_factorial(g - j2) - log_factorial(g - J);
  const long double three_j = std::exp(log_mag);
  const int phase = (j1 - j2 + g) % 2 == 0 ? 1 : -1;
  return static_cast<double>(phase * std::sqrt(2.0L * J + 1.0L) * three_j);
}

/// Clebsch-Gordan coefficient <j1 m1 j2 m2 | J M>, Condon-Shortley phases.
/// Exactly zero when M != m1 + m2, a projection is out of range, or the triangle rule fails.
inline double clebsch_gordan(int j1, int m1, int j2, int m2, int J, int M) {
  if (j1 < 0 || j2 < 0 || J < 0) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(M) > J) return 0.0;
  if (M != m1 + m2 || !detail::triangle(j1, j2, J)) return 0.0;
  if (m1 == 0 && m2 == 0) return clebsch_gordan_zero(j1, j2, J);

  using detail::log_factorial;
  const long double log_pref =
      0.5L * (std::log(2.0L * J + 1.0L) + log_factorial(J + j1 - j2) + log_factorial(J - j1 + j2) +
              log_factorial(j1 + j2 - J) - log_factorial(j1 + j2 + J + 1) + log_factorial(J + M) +
              log_factorial(J - M) + log_factorial(j1 - m1) + log_factorial(j1 + m1) +
              log_factorial(j2 - m2) + log_factorial(j2 + m2));
  const int kmin = std::max({0, j2 - J - m1, j1 - J + m2});
  const int kmax = std::min({j1 + j2 - J, j1 - m1, j2 + m2});
  long double sum = 0.0L;
  for (int k = kmin; k <= kmax; ++k) {
    const long double log_den = log_factorial(k) + log_factorial(j1 + j2 - J - k) +
                                log_factorial(j1 - m1 - k) + log_factorial(j2 + m2 - k) +
                                log_factorial(J - j2 + m1 + k) + log_factorial(J - j1 - m2 + k);
    const long double term = std::exp(log_pref - log_den);
    sum += (k % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum);
}

/// G^{jm}_{j'm',lambda mu}: matrix element of Y_{lambda mu} between rotor
/// states, up to the factor 1/sqrt(4 pi).
inline double g_coefficient(int j, int m, int jp, int mp, int lambda, int mu) {
  if (j < 0 || jp < 0 || lambda < 0) return 0.0;
  const double parity = clebsch_gordan_zero(jp, lambda, j);
  if (parity == 0.0) return 0.0;
  const double norm = std::sqrt((2.0 * jp + 1.0) * (2.0 * lambda + 1.0) / (2.0 * j + 1.0));
  return norm * clebsch_gordan(jp, mp, lambda, mu, j, m) * parity;
}

/// Memoized Clebsch-Gordan values keyed by (j1, m1, j2, m2, J, M).
///
/// Fill it single-threaded, then freeze(); afterwards lookups never mutate and
/// the table can be shared between threads. Missing keys are evaluated on the
/// fly without being stored.
class CGTable {
 public:
  using Key = std::array<int, 6>;

  double operator()(int j1, int m1, int j2, int m2, int J, int M) const {
    const auto it = cache_.find(Key{j1, m1, j2, m2, J, M});
    if (it != cache_.end()) return it->second;
    return clebsch_gordan(j1, m1, j2, m2, J, M);
  }

  double insert(int j1, int m1, int j2, int m2, int J, int M) {
    if (frozen_) throw Error(ErrorCategory::Domain, "CGTable is frozen");
    const double v = clebsch_gordan(j1, m1, j2, m2, J, M);
    cache_.emplace(Key{j1, m1, j2, m2, J, M}, v);
    return v;
  }

  /// Every coefficient needed by g() for j, j' <= jmax and lambda <= lambda_max.
  void populate(int jmax, int lambda_max) {
    for (int j = 0; j <= jmax; ++j)
      for (int jp = 0; jp <= jmax; ++jp)
        for (int lam = std::abs(j - jp); lam <= std::min(j + jp, lambda_max); ++lam) {
          insert(jp, 0, lam, 0, j, 0);
          for (int m = -j; m <= j; ++m)
            for (int mp = -jp; mp <= jp; ++mp)
              if (std::abs(m - mp) <= lam) insert(jp, mp, lam, m - mp, j, m);
        }
  }

  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }
  std::size_t size() const noexcept { return cache_.size(); }

  /// G coefficient assembled from cached CG values.
  double g(int j, int m, int jp, int mp, int lambda, int mu) const {
    const double parity = (*this)(jp, 0, lambda, 0, j, 0);
    if (parity == 0.0) return 0.0;
    const double norm = std::sqrt((2.0 * jp + 1.0) * (2.0 * lambda + 1.0) / (2.0 * j + 1.0));
    return norm * (*this)(jp, mp, lambda, mu, j, m) * parity;
  }

 private:
  std::map<Key, double> cache_;
  bool frozen_ = false;
};

}  // namespace rotcool
