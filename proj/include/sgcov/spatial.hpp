#pragma once

// Spatial primitives for the Monte Carlo simulator: the square simulation
// window, Poisson BS fields, nearest-BS queries and the uplink BS-UE
// association table.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "sgcov/errors.hpp"

namespace sgcov {

struct Point2D {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2D&, const Point2D&) = default;
};

inline double distance(Point2D a, Point2D b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Square window of side `side` centred at the origin.
class SimWindow {
 public:
  explicit SimWindow(double side) : side_(side) {
    if (!(side > 0.0) || !std::isfinite(side))
      throw DomainError("SimWindow: side must be positive and finite");
  }
  double side() const noexcept { return side_; }
  double area() const noexcept { return side_ * side_; }
  double half() const noexcept { return 0.5 * side_; }
  bool contains(Point2D p) const noexcept {
    return std::abs(p.x) <= half() && std::abs(p.y) <= half();
  }

 private:
  double side_;
};

/// Deterministic random stream for one realization. Equal
/// (master_seed, stream_id) pairs give identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed), stream_id_(stream_id), engine_(seed_for(master_seed, stream_id)) {}

  RngStream(const RngStream&) = delete;
  RngStream& operator=(const RngStream&) = delete;
  RngStream(RngStream&&) = default;
  RngStream& operator=(RngStream&&) = default;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double exponential() { return std::exponential_distribution<double>(1.0)(engine_); }
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }

  static std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static std::seed_seq seed_for(std::uint64_t master, std::uint64_t stream) {
    const std::uint64_t a = splitmix64(master);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
    return std::seed_seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                         static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  }

  // seed_seq is not copyable, so it is materialised through this helper.
  struct Engine : std::mt19937_64 {
    explicit Engine(std::seed_seq&& seq) : std::mt19937_64(seq) {}
  };

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  Engine engine_;
};

struct BsField {
  std::vector<Point2D> points;
  SimWindow window;
  double density;
};

enum class OriginBs { Absent, Pinned };

/// Poisson BS field: N ~ Poisson(lambda * area), points uniform in the window.
/// With OriginBs::Pinned the first of the N points is placed at the origin.
inline BsField sample_bs_field(const SimWindow& window, double lambda, RngStream& rng,
                               OriginBs origin = OriginBs::Absent) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw DomainError("sample_bs_field: lambda must be positive and finite");
  const std::uint64_t n = rng.poisson(lambda * window.area());
  BsField field{{}, window, lambda};
  field.points.reserve(n);
  const double h = window.half();
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i == 0 && origin == OriginBs::Pinned) {
      field.points.push_back({0.0, 0.0});
      continue;
    }
    const double x = rng.uniform(-h, h);
    const double y = rng.uniform(-h, h);
    field.points.push_back({x, y});
  }
  return field;
}

struct NearestBs {
  std::size_t index;
  double distance;
};

/// Nearest point to p by exhaustive scan; ties go to the lowest index.
inline NearestBs nearest_bs(Point2D p, std::span<const Point2D> points) {
  if (points.empty()) throw EmptyField("nearest_bs: field has no base stations");
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dx = points[i].x - p.x;
    const double dy = points[i].y - p.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return {best, std::sqrt(best_d2)};
}

inline NearestBs nearest_bs(Point2D p, const BsField& field) { return nearest_bs(p, field.points); }

/// Nearest-BS distances from the origin compared against the Rayleigh law
/// 1 - exp(-lambda pi r^2).
struct RayleighCheck {
  double ks_statistic;
  double critical_95;  // 1.358 / sqrt(n)
  double mean;
  double median;
  double expected_mean;    // 1 / (2 sqrt(lambda))
  double expected_median;  // sqrt(ln 2 / (lambda pi))
  std::size_t samples;
  std::size_t empty_fields;  // realizations skipped because N = 0
};

inline double rayleigh_cdf(double r, double lambda) {
  return -std::expm1(-lambda * std::numbers::pi * r * r);
}

inline RayleighCheck nearest_distance_distribution_check(double lambda, std::size_t samples,
                                                         const SimWindow& window,
                                                         std::uint64_t seed) {
  if (samples < 1000) throw DomainError("nearest_distance_distribution_check: need >= 1000 samples");
  if (window.side() < 10.0 / std::sqrt(lambda))
    throw WindowTooSmall("nearest_distance_distribution_check: side must be >= 10/sqrt(lambda)");

  std::vector<double> d;
  d.reserve(samples);
  std::size_t empty = 0;
  for (std::uint64_t stream = 0; d.size() < samples; ++stream) {
    RngStream rng(seed, stream);
    const BsField field = sample_bs_field(window, lambda, rng);
    if (field.points.empty()) {
      ++empty;
      continue;
    }
    d.push_back(nearest_bs({0.0, 0.0}, field).distance);
  }
  std::sort(d.begin(), d.end());

  const auto n = static_cast<double>(d.size());
  double ks = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double cdf = rayleigh_cdf(d[i], lambda);
    ks = std::max({ks, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    sum += d[i];
  }
  const std::size_t m = d.size() / 2;
  const double median = d.size() % 2 == 1 ? d[m] : 0.5 * (d[m - 1] + d[m]);
  return {ks,
          1.358 / std::sqrt(n),
          sum / n,
          median,
          1.0 / (2.0 * std::sqrt(lambda)),
          std::sqrt(std::numbers::ln2 / (lambda * std::numbers::pi)),
          d.size(),
          empty};
}

struct AssociationRow {
  Point2D bs;
  std::optional<Point2D> ue;
};

struct AssociationTable {
  std::vector<AssociationRow> rows;
  std::optional<std::size_t> typical_index;
  std::size_t attempts = 0;  // candidate UEs drawn, accepted or not

  bool complete() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.ue.has_value(); });
  }
};

inline constexpr std::size_t kDefaultMaxAttempts = 1'000'000;

/// Fills one UE per BS by rejection: each candidate UE is uniform in the
/// window and joins its nearest BS if that BS is still free; otherwise it is
/// discarded. A BS at the origin, if present, becomes the typical row.
inline AssociationTable build_association_table(const BsField& field, const SimWindow& window,
                                                RngStream& rng,
                                                std::size_t max_attempts = kDefaultMaxAttempts) {
  if (field.points.empty()) throw EmptyField("build_association_table: field has no base stations");
  AssociationTable table;
  table.rows.reserve(field.points.size());
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    table.rows.push_back({field.points[i], std::nullopt});
    if (!table.typical_index && field.points[i] == Point2D{0.0, 0.0}) table.typical_index = i;
  }

  const double h = window.half();
  std::size_t free_rows = field.points.size();
  while (free_rows > 0) {
    if (table.attempts >= max_attempts)
      throw AttemptBudgetExhausted("build_association_table: " + std::to_string(max_attempts) +
                                   " candidate UEs drawn, " + std::to_string(free_rows) +
                                   " BSs still unpaired");
    ++table.attempts;
    const double u = rng.uniform(-h, h);
    const double v = rng.uniform(-h, h);
    const Point2D ue{u, v};
    auto& row = table.rows[nearest_bs(ue, field.points).index];
    if (!row.ue) {
      row.ue = ue;
      --free_rows;
    }
  }
  return table;
}

/// Number of rows whose UE is strictly closer to some other BS than to its
/// own partner. Zero for every table built by build_association_table.
inline std::size_t association_violations(const AssociationTable& table) {
  std::size_t bad = 0;
  for (const auto& row : table.rows) {
    if (!row.ue) {
      ++bad;
      continue;
    }
    const double own = distance(*row.ue, row.bs);
    for (const auto& other : table.rows)
      if (distance(*row.ue, other.bs) < own) {
        ++bad;
        break;
      }
  }
  return bad;
}

/// One line per BS: bs_x,bs_y,ue_x,ue_y in metres with 6 decimals; a missing
/// UE leaves its two fields empty.
inline void write_realization_dump(std::ostream& os, const AssociationTable& table) {
  os << "bs_x,bs_y,ue_x,ue_y\n";
  char buf[160];
  for (const auto& row : table.rows) {
    if (row.ue)
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f\n", row.bs.x, row.bs.y, row.ue->x,
                    row.ue->y);
    else
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,,\n", row.bs.x, row.bs.y);
    os << buf;
  }
}

/// Inverse of write_realization_dump.
inline std::vector<AssociationRow> read_realization_dump(std::istream& is) {
  std::vector<AssociationRow> rows;
  std::string line;
  if (!std::getline(is, line) || line != "bs_x,bs_y,ue_x,ue_y")
    throw DomainError("read_realization_dump: missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 4) throw DomainError("read_realization_dump: bad record '" + line + "'");
    AssociationRow row{{std::stod(fields[0]), std::stod(fields[1])}, std::nullopt};
    if (!fields[2].empty()) row.ue = Point2D{std::stod(fields[2]), std::stod(fields[3])};
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sgcov
