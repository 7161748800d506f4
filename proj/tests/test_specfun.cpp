#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "sgcov/specfun.hpp"

using namespace sgcov;

TEST(SineIntegral, AtZero) { EXPECT_DOUBLE_EQ(sine_integral_si(0.0), -std::numbers::pi / 2.0); }

TEST(SineIntegral, AtInfinity) {
  EXPECT_EQ(sine_integral_si(std::numeric_limits<double>::infinity()), 0.0);
}

TEST(SineIntegral, AtOneAgainstLongSeries) {
  const double si1 = static_cast<double>(oracle::si_series(1.0L, 25));
  EXPECT_NEAR(sine_integral_si(1.0), si1 - std::numbers::pi / 2.0, 1e-14);
  EXPECT_NEAR(si1, 0.946083070367183, 1e-14);
}

TEST(SineIntegral, NegativeRejected) {
  EXPECT_THROW(sine_integral_si(-1.0), DomainError);
  EXPECT_THROW(sine_integral_si(std::nan("")), DomainError);
}

TEST(SineIntegral, IncreasingOnFirstLobe) {
  double prev = sine_integral_si(0.0);
  for (int i = 1; i <= 200; ++i) {
    const double x = std::numbers::pi * i / 200.0;
    const double v = sine_integral_si(x);
    EXPECT_GT(v, prev) << "x = " << x;
    prev = v;
  }
}

TEST(SineIntegral, DecaysLikeCosOverX) {
  // si(x) ~ -cos(x)/x for large x.
  for (double x : {200.0, 1000.0, 5000.0}) EXPECT_NEAR(sine_integral_si(x), -std::cos(x) / x, 2.0 / (x * x));
}

TEST(CosineIntegral, QuarterAgainstSeries) {
  EXPECT_NEAR(cosine_integral_ci(0.25), static_cast<double>(oracle::ci_series(0.25L, 12)), 1e-14);
}

TEST(CosineIntegral, TwoAgainstOscillatoryQuadrature) {
  EXPECT_NEAR(cosine_integral_ci(2.0), oracle::ci_oscillatory(2.0), 1e-11);
}

TEST(CosineIntegral, NonPositiveRejected) {
  EXPECT_THROW(cosine_integral_ci(0.0), DomainError);
  EXPECT_THROW(cosine_integral_ci(-3.0), DomainError);
}

TEST(CosineIntegral, LogarithmicNearZero) {
  for (double x : {1e-8, 1e-6, 1e-4})
    EXPECT_NEAR(cosine_integral_ci(x), std::numbers::egamma + std::log(x), x * x);
}

TEST(SiCiBranches, AgreeAtCrossover) {
  const double x = detail::kSiCiCrossover;
  const auto s = detail::sici_series(x);
  const auto c = detail::sici_continued_fraction(x);
  EXPECT_NEAR(s.si, c.si, 1e-12);
  EXPECT_NEAR(s.ci, c.ci, 1e-12);
}

TEST(SiCiBranches, ContinuityAcrossCrossover) {
  const double x = detail::kSiCiCrossover;
  const double below = std::nextafter(x, 0.0);
  const double above = std::nextafter(x, 10.0);
  EXPECT_NEAR(sine_integral_si(below), sine_integral_si(above), 1e-12);
  EXPECT_NEAR(cosine_integral_ci(below), cosine_integral_ci(above), 1e-12);
}

TEST(SiCi, AgreeWithQuadratureOracle) {
  for (double x : {0.01, 0.3, 1.0, 2.5, 3.9, 4.1, 7.0, 12.0, 30.0, 50.0}) {
    EXPECT_NEAR(sine_integral_si(x) + std::numbers::pi / 2.0, oracle::si_quadrature(x), 1e-12) << x;
    EXPECT_NEAR(cosine_integral_ci(x), oracle::ci_quadrature(x), 1e-12) << x;
  }
}

TEST(Beta, HalfHalfIsPi) { EXPECT_DOUBLE_EQ(beta_half_half(), std::numbers::pi); }

TEST(Beta, ReflectionAtThree) {
  EXPECT_NEAR(beta_reflection(3.0), 2.0 * std::numbers::pi / std::sqrt(3.0), 1e-14);
  // B(1 - 1/k, 1/k) = k int_0^inf du / (1 + u^k).
  EXPECT_NEAR(beta_reflection(3.0), 3.0 * oracle::power_denominator_integral(1.0, 3.0), 1e-10);
}

TEST(Beta, ReflectionRejectsSmallKappa) {
  EXPECT_THROW(beta_reflection(1.0), DomainError);
  EXPECT_THROW(beta_reflection(0.5), DomainError);
}

TEST(Beta, PowerDenominatorIdentity) {
  // int_0^inf du / (A + u^k) = A^(1/k - 1) / k * B(1 - 1/k, 1/k).
  for (double kappa : {1.5, 2.0, 2.5, 3.0, 4.0}) {
    for (double a : {0.1, 1.0, 7.5}) {
      const double lhs = oracle::power_denominator_integral(a, kappa);
      const double rhs = std::pow(a, 1.0 / kappa - 1.0) / kappa * beta_reflection(kappa);
      EXPECT_NEAR(lhs, rhs, 1e-9 * rhs) << "kappa " << kappa << " A " << a;
    }
  }
  EXPECT_NEAR(oracle::power_denominator_integral(1.0, 2.0), beta_half_half() / 2.0, 1e-10);
}

TEST(PowerLawTail, QuadraticClosedForm) {
  for (double w : {0.0, 0.3, 1.0, 4.0, 250.0})
    EXPECT_NEAR(power_law_tail(w, 2.0), std::numbers::pi / 2.0 - std::atan(w), 1e-14);
}

TEST(PowerLawTail, AgainstQuadratureOracle) {
  for (double kappa : {1.25, 1.5, 2.5, 3.0, 4.0})
    for (double w : {0.05, 0.7, 3.0}) {
      auto f = [kappa](long double v) { return 1.0L / (1.0L + std::pow(v, (long double)kappa)); };
      long double acc = oracle::gauss_legendre(f, 0.0L, std::ldexp((long double)w, -40), 1);
      for (int i = -40; i < 0; ++i)
        acc += oracle::gauss_legendre(f, std::ldexp((long double)w, i),
                                      std::ldexp((long double)w, i + 1), 4);
      const double head = static_cast<double>(acc);
      EXPECT_NEAR(power_law_tail(w, kappa), oracle::power_denominator_integral(1.0, kappa) - head,
                  1e-10)
          << "kappa " << kappa << " w " << w;
    }
}

TEST(PowerLawTail, FullRangeIsReflection) {
  EXPECT_NEAR(power_law_tail(0.0, 3.0), beta_reflection(3.0) / 3.0, 1e-14);
  EXPECT_EQ(power_law_tail(std::numeric_limits<double>::infinity(), 2.0), 0.0);
  EXPECT_THROW(power_law_tail(-1.0, 2.0), DomainError);
  EXPECT_THROW(power_law_tail(1.0, 1.0), DomainError);
}
