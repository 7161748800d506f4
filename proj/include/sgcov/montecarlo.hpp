#pragma once

// Monte Carlo estimation of downlink and uplink coverage.
//
// Each realization owns the random stream (master_seed, i), so results are
// identical for any worker count. Per realization the SIR is compared with
// the ascending threshold grid and the scan stops at the first failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgcov/coverage.hpp"
#include "sgcov/errors.hpp"
#include "sgcov/parallel.hpp"
#include "sgcov/params.hpp"
#include "sgcov/spatial.hpp"

namespace sgcov {

enum class DiscardReason { EmptyField, AttemptBudgetExhausted };

inline std::string to_string(DiscardReason r) {
  return r == DiscardReason::EmptyField ? "empty_field" : "attempt_budget_exhausted";
}

struct RealizationOutcome {
  /// One SIR per power-control factor (a single entry for downlink).
  /// +inf when the tagged link has no interferers.
  std::vector<double> sir_linear;
  std::size_t n_bs = 0;
  std::optional<DiscardReason> discarded;
};

/// Everything needed to recompute a realization's SIR from scratch.
struct RealizationTrace {
  AssociationTable table;  // downlink rows carry no UEs
  std::size_t tagged = 0;  // serving BS (downlink) or typical BS (uplink)
  std::vector<double> gains;  // fading per row, gains[tagged] is the signal
};

/// Downlink SIR at the origin: p G_t r_t^-alpha over the same sum for every
/// other BS. +inf without interferers.
inline double dl_sir(std::span<const Point2D> bs, std::size_t tagged, std::span<const double> gains,
                     double alpha, double power = 1.0) {
  const Point2D origin{0.0, 0.0};
  const double signal = power * gains[tagged] * std::pow(distance(bs[tagged], origin), -alpha);
  double interference = 0.0;
  for (std::size_t i = 0; i < bs.size(); ++i)
    if (i != tagged) interference += power * gains[i] * std::pow(distance(bs[i], origin), -alpha);
  return interference > 0.0 ? signal / interference : std::numeric_limits<double>::infinity();
}

/// Uplink SIR at the typical BS (row `typical`) with power control factor
/// eps. Every other row's UE transmits with power p R^(alpha eps), R being
/// the distance to its own BS, and is heard over its exact distance to the
/// typical BS.
inline double ul_sir(std::span<const AssociationRow> rows, std::size_t typical,
                     std::span<const double> gains, double alpha, double eps, double power = 1.0) {
  const Point2D at = rows[typical].bs;
  const double r = distance(*rows[typical].ue, at);
  const double signal = power * gains[typical] * std::pow(r, -alpha * (1.0 - eps));
  double interference = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == typical) continue;
    const double r_own = distance(*rows[i].ue, rows[i].bs);
    interference += power * gains[i] * std::pow(r_own, alpha * eps) *
                    std::pow(distance(*rows[i].ue, at), -alpha);
  }
  return interference > 0.0 ? signal / interference : std::numeric_limits<double>::infinity();
}

namespace detail {

inline RealizationOutcome dl_realization_impl(const NetworkParams& params, const SimWindow& window,
                                              RngStream& rng, RealizationTrace* trace) {
  RealizationOutcome out;
  const BsField field = sample_bs_field(window, params.lambda(), rng);
  out.n_bs = field.points.size();
  if (field.points.empty()) {
    out.discarded = DiscardReason::EmptyField;
    return out;
  }
  const NearestBs tagged = nearest_bs({0.0, 0.0}, field);
  std::vector<double> gains(field.points.size());
  gains[tagged.index] = rng.exponential();
  for (std::size_t i = 0; i < field.points.size(); ++i)
    if (i != tagged.index) gains[i] = rng.exponential();
  out.sir_linear = {dl_sir(field.points, tagged.index, gains, params.alpha(), params.power())};
  if (trace) {
    trace->table.rows.clear();
    for (const auto& pt : field.points) trace->table.rows.push_back({pt, std::nullopt});
    trace->tagged = tagged.index;
    trace->gains = std::move(gains);
  }
  return out;
}

inline RealizationOutcome ul_realization_impl(const NetworkParams& params,
                                              const std::vector<double>& epsilons,
                                              const SimWindow& window, RngStream& rng,
                                              std::size_t max_attempts, RealizationTrace* trace) {
  for (double e : epsilons)
    if (!(e >= 0.0 && e <= 1.0)) throw DomainError("ul_realization: epsilon must lie in [0, 1]");
  RealizationOutcome out;
  const BsField field = sample_bs_field(window, params.lambda(), rng, OriginBs::Pinned);
  out.n_bs = field.points.size();
  if (field.points.empty()) {
    out.discarded = DiscardReason::EmptyField;
    return out;
  }
  AssociationTable table;
  try {
    table = build_association_table(field, window, rng, max_attempts);
  } catch (const AttemptBudgetExhausted&) {
    out.discarded = DiscardReason::AttemptBudgetExhausted;
    return out;
  }

  const std::size_t typical = 0;
  const std::size_t n = table.rows.size();
  // Geometry and fading are drawn once and shared by every epsilon.
  std::vector<double> gains(n);
  for (std::size_t i = 0; i < n; ++i) gains[i] = rng.exponential();
  out.sir_linear.reserve(epsilons.size());
  for (double eps : epsilons)
    out.sir_linear.push_back(ul_sir(table.rows, typical, gains, params.alpha(), eps, params.power()));
  if (trace) {
    trace->table = std::move(table);
    trace->tagged = typical;
    trace->gains = std::move(gains);
  }
  return out;
}

}  // namespace detail

/// One downlink realization: typical UE at the origin served by the nearest BS.
inline RealizationOutcome dl_realization(const NetworkParams& params, const SimWindow& window,
                                         RngStream& rng, RealizationTrace* trace = nullptr) {
  return detail::dl_realization_impl(params, window, rng, trace);
}

/// One uplink realization: typical BS pinned at the origin, one SIR per
/// epsilon computed from the exact UE positions of the association table.
inline RealizationOutcome ul_realization(const NetworkParams& params,
                                         const std::vector<double>& epsilons,
                                         const SimWindow& window, RngStream& rng,
                                         RealizationTrace* trace = nullptr,
                                         std::size_t max_attempts = kDefaultMaxAttempts) {
  return detail::ul_realization_impl(params, epsilons, window, rng, max_attempts, trace);
}

struct SweepAccumulator {
  std::vector<std::vector<std::uint64_t>> covered_counts;  // [epsilon][threshold]
  std::uint64_t realizations_used = 0;
  std::uint64_t discards = 0;
  std::map<std::string, std::uint64_t> discards_by_reason;

  SweepAccumulator(std::size_t n_epsilon, std::size_t n_threshold)
      : covered_counts(n_epsilon, std::vector<std::uint64_t>(n_threshold, 0)) {}

  /// Counts the realization as covered at every threshold below the first
  /// one its SIR fails to exceed.
  void add(const RealizationOutcome& outcome, const ThresholdGrid& grid) {
    if (outcome.discarded) {
      ++discards;
      ++discards_by_reason[to_string(*outcome.discarded)];
      return;
    }
    ++realizations_used;
    for (std::size_t e = 0; e < covered_counts.size(); ++e) {
      const double sir = outcome.sir_linear[e];
      auto& row = covered_counts[e];
      for (std::size_t j = 0; j < grid.size() && sir > grid[j].linear(); ++j) ++row[j];
    }
  }

  void merge(const SweepAccumulator& other) {
    for (std::size_t e = 0; e < covered_counts.size(); ++e)
      for (std::size_t j = 0; j < covered_counts[e].size(); ++j)
        covered_counts[e][j] += other.covered_counts[e][j];
    realizations_used += other.realizations_used;
    discards += other.discards;
    for (const auto& [k, v] : other.discards_by_reason) discards_by_reason[k] += v;
  }
};

struct EstimatorResult {
  double p_hat;
  double stderr_;
  double ci95_lo;
  double ci95_hi;
};

inline EstimatorResult estimate(std::uint64_t covered, std::uint64_t used) {
  if (used == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan};
  }
  const double p = static_cast<double>(covered) / static_cast<double>(used);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(used));
  return {p, se, std::max(0.0, p - 1.96 * se), std::min(1.0, p + 1.96 * se)};
}

struct RunMetadata {
  std::uint64_t master_seed = 0;
  std::uint64_t n_realizations = 0;
  std::map<std::string, std::uint64_t> discards_by_reason;
  double window_side = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  std::vector<double> epsilons;
  double wall_time_s = 0.0;
  std::vector<std::string> warnings;
};

struct SweepResult {
  SweepAccumulator accumulator;
  std::vector<std::vector<EstimatorResult>> estimates;  // [epsilon][threshold]
  RunMetadata metadata;
};

/// Below this many expected BSs per window, edge effects are flagged.
inline constexpr double kMinExpectedBs = 50.0;

/// Runs n_realizations realizations and estimates coverage at every
/// (epsilon, threshold). Downlink ignores `epsilons` beyond using a single
/// column.
inline SweepResult run_sweep(LinkMode mode, const NetworkParams& params, const SimWindow& window,
                             const ThresholdGrid& grid, const std::vector<double>& epsilons,
                             std::uint64_t n_realizations, std::uint64_t master_seed,
                             std::size_t workers = 1) {
  if (n_realizations < 1) throw DomainError("run_sweep: n_realizations must be >= 1");
  if (grid.empty() || !strictly_increasing(grid))
    throw DomainError("run_sweep: grid must be non-empty and ascending");
  if (mode == LinkMode::Uplink && epsilons.empty())
    throw DomainError("run_sweep: uplink needs at least one epsilon");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t columns = mode == LinkMode::Downlink ? 1 : epsilons.size();
  workers = std::max<std::size_t>(1, std::min<std::size_t>(workers, n_realizations));
  std::vector<SweepAccumulator> partial(workers, SweepAccumulator(columns, grid.size()));

  parallel_for(n_realizations, workers, [&](std::size_t worker, std::size_t i) {
    RngStream rng(master_seed, i);
    const RealizationOutcome outcome =
        mode == LinkMode::Downlink ? dl_realization(params, window, rng)
                                   : ul_realization(params, epsilons, window, rng);
    partial[worker].add(outcome, grid);
  });

  SweepResult result{SweepAccumulator(columns, grid.size()), {}, {}};
  for (const auto& p : partial) result.accumulator.merge(p);
  const auto& acc = result.accumulator;
  result.estimates.resize(columns);
  for (std::size_t e = 0; e < columns; ++e)
    for (std::size_t j = 0; j < grid.size(); ++j)
      result.estimates[e].push_back(estimate(acc.covered_counts[e][j], acc.realizations_used));

  auto& meta = result.metadata;
  meta.master_seed = master_seed;
  meta.n_realizations = n_realizations;
  meta.discards_by_reason = acc.discards_by_reason;
  meta.window_side = window.side();
  meta.lambda = params.lambda();
  meta.alpha = params.alpha();
  if (mode == LinkMode::Uplink) meta.epsilons = epsilons;
  if (params.lambda() * window.area() < kMinExpectedBs)
    meta.warnings.push_back("expected BS count " + std::to_string(params.lambda() * window.area()) +
                            " is below " + std::to_string(kMinExpectedBs) +
                            "; edge effects may bias the estimate");
  meta.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Expected BS count per window used by the density-invariance experiment.
inline constexpr double kInvarianceExpectedBs = 40.0;

struct InvarianceResult {
  std::vector<double> lambdas;
  std::vector<double> sides;
  std::vector<std::vector<EstimatorResult>> curves;  // [lambda][threshold]
  double max_gap = 0.0;
  /// 3 * sqrt(2) * sqrt(0.25 / n): joint binomial noise at its worst case p = 1/2.
  double noise_bound = 0.0;
  bool within_bound = false;
};

/// Simulates the same (kappa, epsilon) curve at several densities. The window
/// is scaled per density so the expected BS count stays fixed, and each
/// density draws from its own seed so the curves are statistically
/// independent.
inline InvarianceResult density_invariance_experiment(LinkMode mode, double kappa, double epsilon,
                                                      const ThresholdGrid& grid,
                                                      const std::vector<double>& lambdas,
                                                      std::uint64_t n_realizations,
                                                      std::uint64_t seed, std::size_t workers = 1) {
  if (lambdas.size() < 2) throw DomainError("density_invariance_experiment: need >= 2 densities");
  InvarianceResult out;
  out.lambdas = lambdas;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const NetworkParams params(lambdas[k], 2.0 * kappa, epsilon);
    const SimWindow window(std::sqrt(kInvarianceExpectedBs / lambdas[k]));
    const std::uint64_t stream_seed = RngStream::splitmix64(seed + 0x9E3779B97F4A7C15ULL * (k + 1));
    SweepResult sweep = run_sweep(mode, params, window, grid, {epsilon}, n_realizations,
                                  stream_seed, workers);
    out.sides.push_back(window.side());
    out.curves.push_back(std::move(sweep.estimates[0]));
  }
  for (std::size_t a = 0; a < out.curves.size(); ++a)
    for (std::size_t b = a + 1; b < out.curves.size(); ++b)
      for (std::size_t j = 0; j < grid.size(); ++j)
        out.max_gap = std::max(out.max_gap, std::abs(out.curves[a][j].p_hat - out.curves[b][j].p_hat));
  out.noise_bound = 3.0 * std::sqrt(2.0) * std::sqrt(0.25 / static_cast<double>(n_realizations));
  out.within_bound = out.max_gap <= out.noise_bound;
  return out;
}

}  // namespace sgcov
