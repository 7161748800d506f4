#pragma once

// Analytic downlink and uplink coverage probabilities under the PPP model.
//
// Every function takes the SIR threshold and the path-loss parameter
// kappa = alpha / 2. The *_with_density variants carry the BS density
// through the integrals explicitly; they agree with the density-free forms
// for every lambda, which is what the invariance tests check.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string_view>
#include <vector>

#include "sgcov/errors.hpp"
#include "sgcov/parallel.hpp"
#include "sgcov/params.hpp"
#include "sgcov/quadrature.hpp"
#include "sgcov/specfun.hpp"

namespace sgcov {

enum class Method { AnalyticGeneral, AnalyticClosedForm, Simulated };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::AnalyticGeneral: return "analytic_general";
    case Method::AnalyticClosedForm: return "analytic_closed_form";
    case Method::Simulated: return "simulated";
  }
  return "unknown";
}

struct CoveragePoint {
  SirThreshold threshold;
  double probability;
  Method method;
  double stderr_ = 0.0;
};

enum class LinkMode { Downlink, Uplink };

/// Hard ceiling on integrand evaluations for one nested coverage value.
inline constexpr std::size_t kNestedEvaluationCeiling = 10'000'000;

namespace detail {

inline void check_kappa(double kappa) {
  if (!(kappa > 1.0) || !std::isfinite(kappa))
    throw DomainError("kappa must exceed 1 (alpha > 2)");
}

inline void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0, 1]");
}

/// Upper limit for integrals whose integrand is bounded by exp(-z).
inline double exponential_cutoff(const QuadratureSpec& spec) {
  return -std::log(spec.abs_tol) + 5.0;
}

/// integral_w^inf du / (1 + u^kappa)
inline double dl_tail_integral(double w, double kappa, const QuadratureSpec& spec) {
  auto f = [kappa](double u) { return 1.0 / (1.0 + std::pow(u, kappa)); };
  return require_converged(integrate_semi_infinite(f, w, spec, std::max(1.0, w)),
                           "dl_coverage inner integral");
}

/// integral_0^inf integral_0^u e^-x x^(eps kappa) / (c x^(eps kappa) + u^kappa) dx du.
///
/// Evaluated with the order swapped: for fixed x the u-integral over
/// [x, inf) is A^(1/k - 1) power_law_tail(x A^(-1/k)) with A = c x^(eps k),
/// which leaves a single smooth integral over x.
inline double ul_interference_integral(double c, double kappa, double epsilon,
                                       const QuadratureSpec& spec, EvaluationBudget& budget) {
  const double ek = epsilon * kappa;
  auto over_x = [&](double x) {
    budget.charge();
    if (x <= 0.0) return 0.0;
    const double xe = ek == 0.0 ? 1.0 : std::pow(x, ek);
    const double a = c * xe;
    if (a == 0.0) return 0.0;
    const double root = std::pow(a, 1.0 / kappa);
    return std::exp(-x) * xe * (root / a) * power_law_tail(x / root, kappa);
  };
  return require_converged(integrate_finite(over_x, 0.0, exponential_cutoff(spec), spec),
                           "ul_coverage x-integral");
}

}  // namespace detail

/// Downlink coverage, density-free:
/// p = 1 / (1 + xi^(1/k) * integral_{xi^(-1/k)}^inf du / (1 + u^k)).
inline double dl_coverage(SirThreshold xi, double kappa, const QuadratureSpec& spec = {}) {
  detail::check_kappa(kappa);
  const double root = std::pow(xi.linear(), 1.0 / kappa);
  return 1.0 / (1.0 + root * detail::dl_tail_integral(1.0 / root, kappa, spec));
}

/// Closed form for alpha = 4.
inline double dl_coverage_alpha4(SirThreshold xi) {
  const double s = std::sqrt(xi.linear());
  // pi/2 - atan(1/s) == atan(s) for s > 0
  return 1.0 / (1.0 + s * std::atan(s));
}

/// Closed form for alpha = 6, written in c = xi^(-1/3).
inline double dl_coverage_alpha6(SirThreshold xi) {
  const double c = std::cbrt(1.0 / xi.linear());
  const double sqrt3 = std::numbers::sqrt3;
  const double bracket = std::log(c * c - c + 1.0) +
                         sqrt3 * (std::numbers::pi - 2.0 * std::atan((2.0 * c - 1.0) / sqrt3)) -
                         2.0 * std::log(c + 1.0);
  return 6.0 * c / (6.0 * c + bracket);
}

/// Downlink coverage with the density kept in the integral over the
/// distance r to the serving BS.
inline double dl_coverage_with_density(SirThreshold xi, const NetworkParams& params,
                                       const QuadratureSpec& spec = {}) {
  const double kappa = params.kappa();
  const double lt = params.scaled_density();
  const double root = std::pow(xi.linear(), 1.0 / kappa);
  const double interference = root * detail::dl_tail_integral(1.0 / root, kappa, spec);
  auto over_r = [&](double r) {
    const double r2 = r * r;
    return 2.0 * lt * r * std::exp(-lt * r2) * std::exp(-lt * r2 * interference);
  };
  const double r_max = std::sqrt(detail::exponential_cutoff(spec) / lt);
  return require_converged(integrate_finite(over_r, 0.0, r_max, spec),
                           "dl_coverage_with_density");
}

namespace detail {

/// Outer integrand of the general uplink form: exp(-z - c J(c)),
/// c = xi z^(kappa (1 - eps)).
struct UlOuterIntegrand {
  double xi;
  double kappa;
  double epsilon;
  QuadratureSpec inner;
  EvaluationBudget* budget;

  double operator()(double z) const {
    const double c = xi * std::pow(z, kappa * (1.0 - epsilon));
    return std::exp(-z - c * ul_interference_integral(c, kappa, epsilon, inner, *budget));
  }
};

/// Outer integrand of the epsilon = 0 form, where the x-integral is 1 - e^-u.
struct UlEps0OuterIntegrand {
  double xi;
  double kappa;
  QuadratureSpec inner;
  EvaluationBudget* budget;

  double operator()(double z) const {
    const double c = xi * std::pow(z, kappa);
    auto over_u = [&](double u) {
      budget->charge();
      return -std::expm1(-u) / (c + std::pow(u, kappa));
    };
    const double scale = 1.0 + std::pow(c, 1.0 / kappa);
    const double integral = require_converged(integrate_semi_infinite(over_u, 0.0, inner, scale),
                                              "ul_coverage_eps0 u-integral");
    return std::exp(-z - c * integral);
  }
};

}  // namespace detail

/// Uplink coverage with fractional power control, density-free triple integral.
/// The outer z-integral is truncated where exp(-z) drops below abs_tol.
inline double ul_coverage(SirThreshold xi, double kappa, double epsilon,
                          const QuadratureSpec& spec = {},
                          std::size_t evaluation_ceiling = kNestedEvaluationCeiling) {
  detail::check_kappa(kappa);
  detail::check_epsilon(epsilon);
  EvaluationBudget budget(evaluation_ceiling);
  const detail::UlOuterIntegrand f{xi.linear(), kappa, epsilon, spec.tightened(10.0), &budget};
  return require_converged(integrate_finite(f, 0.0, detail::exponential_cutoff(spec), spec),
                           "ul_coverage");
}

/// Uplink coverage without power control, reduced to a double integral.
inline double ul_coverage_eps0(SirThreshold xi, double kappa, const QuadratureSpec& spec = {},
                               std::size_t evaluation_ceiling = kNestedEvaluationCeiling) {
  detail::check_kappa(kappa);
  EvaluationBudget budget(evaluation_ceiling);
  const detail::UlEps0OuterIntegrand f{xi.linear(), kappa, spec.tightened(10.0), &budget};
  return require_converged(integrate_finite(f, 0.0, detail::exponential_cutoff(spec), spec),
                           "ul_coverage_eps0");
}

/// Uplink coverage for alpha = 4 without power control, via si/ci.
inline double ul_coverage_eps0_alpha4(SirThreshold xi, const QuadratureSpec& spec = {}) {
  const double s = std::sqrt(xi.linear());
  auto over_z = [s](double z) {
    const double w = s * z;
    if (w == 0.0) return std::exp(-z);
    const double bracket = std::numbers::pi / 2.0 - cosine_integral_ci(w) * std::sin(w) +
                           sine_integral_si(w) * std::cos(w);
    return std::exp(-z * (1.0 + s * bracket));
  };
  return require_converged(
      integrate_finite(over_z, 0.0, detail::exponential_cutoff(spec), spec),
      "ul_coverage_eps0_alpha4");
}

/// Uplink coverage under full channel inversion: no outer z-integral remains.
inline double ul_coverage_eps1(SirThreshold xi, double kappa, const QuadratureSpec& spec = {},
                               std::size_t evaluation_ceiling = kNestedEvaluationCeiling) {
  detail::check_kappa(kappa);
  EvaluationBudget budget(evaluation_ceiling);
  const double x_cap = detail::exponential_cutoff(spec);
  const QuadratureSpec inner = spec.tightened(10.0);
  const double xi_lin = xi.linear();
  auto over_u = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double uk = std::pow(u, kappa);
    auto over_x = [&](double x) {
      budget.charge();
      const double xk = std::pow(x, kappa);
      return xk * std::exp(-x) / (xi_lin * xk + uk);
    };
    return require_converged(integrate_finite(over_x, 0.0, std::min(u, x_cap), inner),
                             "ul_coverage_eps1 x-integral");
  };
  const double exponent = require_converged(integrate_semi_infinite(over_u, 0.0, spec),
                                            "ul_coverage_eps1 u-integral");
  return std::exp(-xi_lin * exponent);
}

/// Uplink coverage with the density kept in all three integrals.
inline double ul_coverage_with_density(SirThreshold xi, const NetworkParams& params,
                                       const QuadratureSpec& spec = {},
                                       std::size_t evaluation_ceiling = kNestedEvaluationCeiling) {
  const double kappa = params.kappa();
  const double epsilon = params.epsilon();
  const double lt = params.scaled_density();
  const double ek = epsilon * kappa;
  const double two_k = 2.0 * kappa;
  const double cutoff = detail::exponential_cutoff(spec);
  EvaluationBudget budget(evaluation_ceiling);
  const QuadratureSpec middle = spec.tightened(10.0);
  const QuadratureSpec inner = spec.tightened(100.0);

  auto over_r = [&](double r) {
    const double signal_term = xi.linear() * std::pow(r, two_k * (1.0 - epsilon));
    auto over_x = [&](double x) {
      if (x <= 0.0) return 0.0;
      const double x2k = std::pow(x, two_k);
      auto over_u = [&](double u) {
        budget.charge();
        const double ue = ek == 0.0 ? 1.0 : std::pow(u, ek);
        return std::exp(-lt * u) * ue / (signal_term * ue + x2k);
      };
      const double upper = std::min(x * x, cutoff / lt);
      return x * require_converged(integrate_finite(over_u, 0.0, upper, inner),
                                   "ul_coverage_with_density u-integral");
    };
    const double x_scale = 1.0 / std::sqrt(lt) + std::pow(signal_term, 1.0 / two_k);
    const double k = require_converged(integrate_semi_infinite(over_x, 0.0, middle, x_scale),
                                       "ul_coverage_with_density x-integral");
    const double r2 = r * r;
    return 2.0 * lt * r * std::exp(-lt * r2) * std::exp(-2.0 * lt * lt * signal_term * k);
  };
  const double r_max = std::sqrt(cutoff / lt);
  return require_converged(integrate_finite(over_r, 0.0, r_max, spec),
                           "ul_coverage_with_density");
}

/// Coverage over a threshold grid, using the cheapest applicable formula.
/// Output order matches grid order regardless of `workers`.
inline std::vector<CoveragePoint> coverage_curve(LinkMode mode, const ThresholdGrid& grid,
                                                 double kappa, double epsilon = 0.0,
                                                 std::size_t workers = 1,
                                                 const QuadratureSpec& spec = {}) {
  if (grid.empty()) throw DomainError("coverage_curve: grid is empty");
  if (!strictly_increasing(grid))
    throw DomainError("coverage_curve: grid must be strictly increasing");
  detail::check_kappa(kappa);
  detail::check_epsilon(epsilon);

  auto evaluate = [&](SirThreshold xi) -> CoveragePoint {
    if (mode == LinkMode::Downlink) {
      if (kappa == 2.0) return {xi, dl_coverage_alpha4(xi), Method::AnalyticClosedForm};
      if (kappa == 3.0) return {xi, dl_coverage_alpha6(xi), Method::AnalyticClosedForm};
      return {xi, dl_coverage(xi, kappa, spec), Method::AnalyticGeneral};
    }
    if (epsilon == 0.0) {
      if (kappa == 2.0)
        return {xi, ul_coverage_eps0_alpha4(xi, spec), Method::AnalyticClosedForm};
      return {xi, ul_coverage_eps0(xi, kappa, spec), Method::AnalyticGeneral};
    }
    if (epsilon == 1.0) return {xi, ul_coverage_eps1(xi, kappa, spec), Method::AnalyticGeneral};
    return {xi, ul_coverage(xi, kappa, epsilon, spec), Method::AnalyticGeneral};
  };

  std::vector<CoveragePoint> out(grid.size(), CoveragePoint{grid.front(), 0.0, Method::AnalyticGeneral});
  parallel_for(grid.size(), workers, [&](std::size_t, std::size_t i) { out[i] = evaluate(grid[i]); });
  return out;
}

}  // namespace sgcov
