#pragma once

// Sine and cosine integrals, the two Beta-function values used by the
// uplink closed forms, and the power-law tail integral.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "sgcov/errors.hpp"

namespace sgcov {

namespace detail {

/// Arguments at or below this use the power series; above it the continued
/// fraction for E1(ix).
inline constexpr double kSiCiCrossover = 4.0;

struct SiCi {
  double si;  // Si(x) - pi/2
  double ci;
};

inline SiCi sici_series(double x) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double x2 = x * x;
  // Si(x) = sum (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
  double term = x;  // x^(2k+1)/(2k+1)!
  double si = x;
  // Ci(x) = gamma + ln x + sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!)
  double cterm = 1.0;  // x^(2k)/(2k)!
  double ci_sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double n = 2.0 * k;
    cterm *= -x2 / ((n - 1.0) * n);
    term *= -x2 / (n * (n + 1.0));
    const double dci = cterm / n;
    const double dsi = term / (n + 1.0);
    ci_sum += dci;
    si += dsi;
    if (std::abs(dsi) <= eps * std::abs(si) && std::abs(dci) <= eps * std::abs(ci_sum)) break;
  }
  return {si - std::numbers::pi / 2.0, std::numbers::egamma + std::log(x) + ci_sum};
}

// Modified Lentz evaluation of E1(ix) = -Ci(x) + i (Si(x) - pi/2).
inline SiCi sici_continued_fraction(double x) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = 1e-300;
  using cd = std::complex<double>;
  cd b(1.0, x);
  cd c(1.0 / tiny, 0.0);
  cd d = 1.0 / b;
  cd h = d;
  for (int i = 2; i < 1000; ++i) {
    const double a = -static_cast<double>((i - 1) * (i - 1));
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const cd del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
  }
  h *= cd(std::cos(x), -std::sin(x));
  return {h.imag(), -h.real()};
}

}  // namespace detail

/// si(x) = Si(x) - pi/2 = -integral_x^inf sin(t)/t dt, for x >= 0.
inline double sine_integral_si(double x) {
  if (std::isnan(x) || x < 0.0) throw DomainError("sine_integral_si: requires x >= 0");
  if (x == 0.0) return -std::numbers::pi / 2.0;
  if (std::isinf(x)) return 0.0;
  return x <= detail::kSiCiCrossover ? detail::sici_series(x).si
                                     : detail::sici_continued_fraction(x).si;
}

/// Ci(x) = -integral_x^inf cos(t)/t dt, for x > 0.
inline double cosine_integral_ci(double x) {
  if (std::isnan(x) || x <= 0.0) throw DomainError("cosine_integral_ci: requires x > 0");
  if (std::isinf(x)) return 0.0;
  return x <= detail::kSiCiCrossover ? detail::sici_series(x).ci
                                     : detail::sici_continued_fraction(x).ci;
}

/// B(1/2, 1/2).
inline constexpr double beta_half_half() { return std::numbers::pi; }

/// B(1 - 1/kappa, 1/kappa) = pi / sin(pi / kappa), by the reflection formula.
inline double beta_reflection(double kappa) {
  if (!(kappa > 1.0)) throw DomainError("beta_reflection: requires kappa > 1");
  return std::numbers::pi / std::sin(std::numbers::pi / kappa);
}

/// integral_w^inf dv / (1 + v^kappa) for w >= 0, kappa > 1. With
/// y = 1 / (1 + v^kappa) this is B(y_w; 1 - 1/kappa, 1/kappa) / kappa.
inline double power_law_tail(double w, double kappa) {
  if (!(kappa > 1.0)) throw DomainError("power_law_tail: requires kappa > 1");
  if (std::isnan(w) || w < 0.0) throw DomainError("power_law_tail: requires w >= 0");
  const double y = 1.0 / (1.0 + std::pow(w, kappa));
  if (y == 0.0) return 0.0;
  return boost::math::beta(1.0 - 1.0 / kappa, 1.0 / kappa, y) / kappa;
}

}  // namespace sgcov
