#pragma once

// Adaptive Gauss-Kronrod quadrature over finite and semi-infinite ranges.
//
// The finite-range integrator is a global adaptive scheme in the style of
// QUADPACK's QAG: the segment with the largest error estimate is bisected
// until the summed error meets max(abs_tol, rel_tol * |value|).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "sgcov/errors.hpp"

namespace sgcov {

struct QuadratureSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  std::size_t max_subdivisions = 2000;
  /// Relative panel contribution below which a semi-infinite tail is dropped.
  double tail_cutoff = 1e-10;

  void validate() const {
    if (!(rel_tol > 0.0)) throw DomainError("QuadratureSpec: rel_tol must be > 0");
    if (!(abs_tol > 0.0)) throw DomainError("QuadratureSpec: abs_tol must be > 0");
    if (max_subdivisions < 1)
      throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
    if (!(tail_cutoff > 0.0 && tail_cutoff <= rel_tol))
      throw DomainError("QuadratureSpec: tail_cutoff must lie in (0, rel_tol]");
  }

  /// Same spec with both tolerances scaled by `factor`.
  QuadratureSpec tightened(double factor) const {
    QuadratureSpec s = *this;
    s.rel_tol /= factor;
    s.abs_tol /= factor;
    s.tail_cutoff = std::min(s.tail_cutoff, s.rel_tol);
    return s;
  }
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980160479, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
double checked_eval(F& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    std::ostringstream os;
    os.precision(17);
    os << "integrand returned " << y << " at x = " << x;
    throw NonFiniteEvaluation(os.str());
  }
  return y;
}

template <class F>
Segment kronrod21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double fc = checked_eval(f, center);
  double kronrod = fc * kKronrodWeights[10];
  double gauss = 0.0;
  double abs_sum = std::abs(kronrod);
  std::array<double, 10> f_lo{};
  std::array<double, 10> f_hi{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kKronrodNodes[j];
    f_lo[j] = checked_eval(f, center - dx);
    f_hi[j] = checked_eval(f, center + dx);
    const double pair = f_lo[j] + f_hi[j];
    kronrod += kKronrodWeights[j] * pair;
    abs_sum += kKronrodWeights[j] * (std::abs(f_lo[j]) + std::abs(f_hi[j]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }

  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[10] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 10; ++j)
    asc += kKronrodWeights[j] * (std::abs(f_lo[j] - mean) + std::abs(f_hi[j] - mean));

  const double result = kronrod * half;
  const double result_abs = abs_sum * std::abs(half);
  const double result_asc = asc * std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  if (result_asc != 0.0 && err != 0.0)
    err = result_asc * std::min(1.0, std::pow(200.0 * err / result_asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (result_abs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * result_abs, err);
  return {a, b, result, err};
}

}  // namespace detail

/// Adaptive estimate of the integral of f over [a, b].
///
/// The integrand is only sampled at interior nodes, so removable endpoint
/// singularities need no special handling. When max_subdivisions is reached
/// the best estimate is returned with converged == false.
template <class F>
IntegralResult integrate_finite(F&& f, double a, double b,
                                const QuadratureSpec& spec = {}) {
  if (!(a <= b)) throw DomainError("integrate_finite: requires a <= b");
  IntegralResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }

  std::priority_queue<detail::Segment> heap;
  std::vector<detail::Segment> settled;  // too narrow to split further
  heap.push(detail::kronrod21(f, a, b));
  out.evaluations = 21;
  double total = heap.top().value;
  double total_err = heap.top().error;
  std::size_t segments = 1;

  auto target = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };

  while (total_err > target() && !heap.empty()) {
    if (segments >= spec.max_subdivisions) break;
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      settled.push_back(worst);
      continue;
    }
    const detail::Segment left = detail::kronrod21(f, worst.a, mid);
    const detail::Segment right = detail::kronrod21(f, mid, worst.b);
    out.evaluations += 42;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }

  // Re-sum from scratch to shed the drift of the running totals.
  double value = 0.0;
  double error = 0.0;
  for (const auto& s : settled) {
    value += s.value;
    error += s.error;
  }
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = value;
  out.error_estimate = error;
  out.converged = error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
  return out;
}

/// Integral of f over [a, inf).
///
/// The primary route maps [a, inf) onto (0, 1] with u = a + scale * (1 - t) / t;
/// `scale` should be the length over which f decays. The far tail lands near
/// t = 0, where doubles are dense enough to resolve algebraic decay. If that
/// does not converge, the range is covered by panels of doubling width until
/// a panel contributes less than tail_cutoff of the running total.
template <class F>
IntegralResult integrate_semi_infinite(F&& f, double a, const QuadratureSpec& spec = {},
                                       double scale = 1.0) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw DomainError("integrate_semi_infinite: scale must be positive and finite");
  if (!std::isfinite(a)) throw DomainError("integrate_semi_infinite: a must be finite");

  constexpr double kFloor = 1e-150;  // keeps (scale / t) / t finite
  auto mapped = [&](double t) -> double {
    if (!(t >= kFloor)) return 0.0;
    const double v = f(a + scale * (1.0 - t) / t);
    return v == 0.0 ? 0.0 : v * ((scale / t) / t);
  };
  IntegralResult primary = integrate_finite(mapped, 0.0, 1.0, spec);
  // The mass below the floor is roughly t * mapped(t) there; if that is not
  // negligible the tail decays too slowly for the mapping.
  const double edge = std::abs(kFloor * mapped(kFloor));
  if (primary.converged && edge <= spec.tail_cutoff * std::abs(primary.value)) return primary;

  IntegralResult out;
  out.evaluations = primary.evaluations;
  double lo = a;
  double width = scale;
  double previous = std::numeric_limits<double>::infinity();
  int growing = 0;
  constexpr int kMaxPanels = 200;
  bool all_converged = true;
  for (int panel = 0; panel < kMaxPanels; ++panel) {
    const IntegralResult piece = integrate_finite(f, lo, lo + width, spec);
    out.evaluations += piece.evaluations;
    out.value += piece.value;
    out.error_estimate += piece.error_estimate;
    all_converged = all_converged && piece.converged;
    const double magnitude = std::abs(piece.value);
    if (magnitude <= spec.tail_cutoff * std::abs(out.value) ||
        (magnitude == 0.0 && out.value == 0.0 && panel > 4)) {
      out.converged = all_converged;
      return out;
    }
    // Each panel is twice as wide, so a decaying integrand must at least
    // shrink per unit length; a panel total that keeps growing does not decay.
    growing = magnitude >= previous * (1.0 - 1e-6) ? growing + 1 : 0;
    if (growing >= 8)
      throw SlowDecay("integrate_semi_infinite: panel contributions are not decreasing");
    previous = magnitude;
    lo += width;
    width *= 2.0;
  }
  throw SlowDecay("integrate_semi_infinite: tail did not fall below tail_cutoff");
}

/// Counts integrand evaluations across nested integrals and throws
/// PerformanceBudgetExceeded once the ceiling is crossed.
class EvaluationBudget {
 public:
  explicit EvaluationBudget(std::size_t ceiling) : ceiling_(ceiling) {}

  void charge(std::size_t n = 1) {
    used_ += n;
    if (used_ > ceiling_) {
      std::ostringstream os;
      os << "integrand evaluation ceiling of " << ceiling_ << " exceeded";
      throw PerformanceBudgetExceeded(os.str());
    }
  }

  std::size_t used() const noexcept { return used_; }
  std::size_t ceiling() const noexcept { return ceiling_; }

 private:
  std::size_t ceiling_;
  std::size_t used_ = 0;
};

/// Throws NonConvergence unless `r` met its tolerance.
inline double require_converged(const IntegralResult& r, const char* what) {
  if (!r.converged) {
    std::ostringstream os;
    os.precision(6);
    os << what << ": quadrature did not converge (value " << r.value << ", error "
       << r.error_estimate << ", " << r.evaluations << " evaluations)";
    throw NonConvergence(os.str());
  }
  return r.value;
}

}  // namespace sgcov
