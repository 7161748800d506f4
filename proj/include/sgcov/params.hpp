#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "sgcov/errors.hpp"

namespace sgcov {

/// Physical model parameters. kappa is always derived from alpha.
class NetworkParams {
 public:
  NetworkParams(double lambda, double alpha, double epsilon = 0.0, double power = 1.0)
      : lambda_(lambda), alpha_(alpha), epsilon_(epsilon), power_(power) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw DomainError("NetworkParams: lambda must be a positive finite density");
    if (!(alpha > 2.0) || !std::isfinite(alpha))
      throw DomainError("NetworkParams: alpha must exceed 2");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
      throw DomainError("NetworkParams: epsilon must lie in [0, 1]");
    if (!(power > 0.0) || !std::isfinite(power))
      throw DomainError("NetworkParams: power must be positive");
  }

  double lambda() const noexcept { return lambda_; }
  double alpha() const noexcept { return alpha_; }
  double kappa() const noexcept { return alpha_ / 2.0; }
  double epsilon() const noexcept { return epsilon_; }
  double power() const noexcept { return power_; }
  /// pi * lambda.
  double scaled_density() const noexcept { return std::numbers::pi * lambda_; }

  NetworkParams with_lambda(double lambda) const {
    return NetworkParams(lambda, alpha_, epsilon_, power_);
  }
  NetworkParams with_epsilon(double epsilon) const {
    return NetworkParams(lambda_, alpha_, epsilon, power_);
  }

 private:
  double lambda_;
  double alpha_;
  double epsilon_;
  double power_;
};

/// SIR threshold carried in both dB and linear form.
class SirThreshold {
 public:
  static SirThreshold from_db(double db) {
    if (std::isnan(db)) throw DomainError("SirThreshold: dB value is NaN");
    return SirThreshold(db, std::pow(10.0, db / 10.0));
  }

  static SirThreshold from_linear(double linear) {
    if (!(linear > 0.0) || !std::isfinite(linear))
      throw DomainError("SirThreshold: linear value must be positive and finite");
    return SirThreshold(10.0 * std::log10(linear), linear);
  }

  double db() const noexcept { return db_; }
  double linear() const noexcept { return linear_; }

  friend bool operator==(const SirThreshold&, const SirThreshold&) = default;

 private:
  SirThreshold(double db, double linear) : db_(db), linear_(linear) {}
  double db_;
  double linear_;
};

using ThresholdGrid = std::vector<SirThreshold>;

/// Thresholds min_db, min_db + step_db, ... up to max_db inclusive.
inline ThresholdGrid make_db_grid(double min_db, double max_db, double step_db) {
  if (!(step_db > 0.0)) throw DomainError("make_db_grid: step must be positive");
  if (!(min_db <= max_db)) throw DomainError("make_db_grid: min must not exceed max");
  const auto steps = static_cast<std::size_t>(std::floor((max_db - min_db) / step_db + 1e-9));
  ThresholdGrid grid;
  grid.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    grid.push_back(SirThreshold::from_db(min_db + static_cast<double>(i) * step_db));
  return grid;
}

/// The -15..15 dB grid in 1 dB steps.
inline ThresholdGrid default_grid() { return make_db_grid(-15.0, 15.0, 1.0); }

inline bool strictly_increasing(const ThresholdGrid& grid) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i].linear() > grid[i - 1].linear())) return false;
  return true;
}

}  // namespace sgcov
