#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "intermittent/partitions.hpp"
#include "intermittent/stopping.hpp"

namespace intermittent {

// ---------------------------------------------------------------------------
// d* metric on one-sided sequences, truncated at a finite depth.

struct DStar {
  double value = 0.0;
  /// Upper bound on the omitted tail sum_{i > D}; 0 when the caller certifies
  /// the sequences agree beyond depth D.
  double tail_bound = 0.0;
};

/// sum_{i=0}^{D} 2^{-i-1} |a_i - b_i| / (1 + |a_i - b_i|), where element i of
/// each span is coordinate -i. Both spans must hold at least D + 1 entries.
[[nodiscard]] DStar dstar(std::span<const double> a, std::span<const double> b, std::size_t depth,
                          bool eventually_equal = false);

// ---------------------------------------------------------------------------
// Growth bound for zeta_k with finite partitions.

struct GrowthBoundSpec {
  double epsilon = 1.0;
  PartitionFamily family;
  LagSchedule schedule;

  GrowthBoundSpec(double eps, PartitionFamily fam, LagSchedule sched);
};

struct GrowthBound {
  double log2 = 0.0;
  /// 2^log2, saturated at the largest finite double.
  double value = 0.0;
};

/// |P_k|^{l_k} 2^{l_k eps}. Throws std::invalid_argument for a zero lag or a
/// non-positive epsilon.
[[nodiscard]] GrowthBound growth_bound(std::uint64_t cells, std::uint64_t lag, double epsilon);
/// Throws std::domain_error for a countably infinite family.
[[nodiscard]] GrowthBound growth_bound(const GrowthBoundSpec& spec, Level k);

/// (k + 1) 2^{-l_k eps}: ceiling on P(zeta_k >= bound).
[[nodiscard]] double violation_ceiling(const GrowthBoundSpec& spec, Level k);

/// Is sum_k (k + 1) 2^{-l_k eps} finite? `symbolic` is decided from the rule
/// when possible (linear: always; log_floor: iff c * eps > 2); the partial sum
/// runs to `horizon` (or the custom table's end).
struct Summability {
  std::optional<bool> symbolic;
  double partial_sum = 0.0;
  Level terms = 0;
};
[[nodiscard]] Summability check_summability(const GrowthBoundSpec& spec, Level horizon);

struct ViolationRow {
  Level k = 0;
  std::size_t n_seeds = 0;     // seeds with a decided outcome at k
  std::size_t violations = 0;  // zeta_k >= bound
  std::size_t censored = 0;    // zeta_k unseen and horizon < bound
  double rate = 0.0;
  double ceiling = 0.0;
  double std_error = 0.0;  // sqrt(rate (1 - rate) / n_seeds)
  double bound_log2 = 0.0;
  bool within_tolerance = true;  // rate <= ceiling + 3 std_error
};

/// Per-k frequency of zeta_k >= |P_k|^{l_k} 2^{l_k eps} over seeds.
///
/// `per_seed[s]` is seed s's event stream in k order. A seed whose stream
/// stops before k only saw x_0..x_{horizon-1}, so zeta_k >= horizon: that is
/// a violation when horizon >= bound and censored otherwise.
[[nodiscard]] std::vector<ViolationRow> bound_violation_rate(
    const std::vector<std::vector<ScanEvent>>& per_seed, const GrowthBoundSpec& spec, Level k_min,
    Level k_max, std::uint64_t horizon);

// ---------------------------------------------------------------------------
// Empirical distribution tools.

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
[[nodiscard]] double ks_distance(std::span<const double> a, std::span<const double> b);
/// One-sample statistic against a continuous reference CDF.
[[nodiscard]] double ks_distance_to_cdf(std::span<const double> sample,
                                        const std::function<double(double)>& cdf);
/// Asymptotic two-sample critical value c(alpha) sqrt((n + m) / (n m)).
[[nodiscard]] double ks_critical_value(std::size_t n, std::size_t m, double c_alpha = 1.36);

/// Spearman rank correlation with average ranks for ties; NaN when either
/// side is constant.
[[nodiscard]] double spearman(std::span<const double> x, std::span<const double> y);

/// Linear-interpolated quantile (R type 7). Empty input gives NaN.
[[nodiscard]] double quantile(std::vector<double> values, double q);
[[nodiscard]] inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

// ---------------------------------------------------------------------------
// Error curves.

/// One prediction with its oracle: g*_k = E(X_{zeta_k + 1} | X_0..X_{zeta_k}).
struct PredictionRecord {
  Level k = 0;
  std::uint64_t zeta = 0;
  double g = 0.0;
  std::optional<double> oracle;
  /// X_{zeta_k + 1} when the path reached it.
  std::optional<double> next_value;
};

struct CurveRow {
  Level k = 0;
  std::size_t n_seeds = 0;
  double g_median = 0.0;
  double zeta_median = 0.0;
  // NaN when the model has no oracle.
  double median_abs_err = 0.0;
  double mean_abs_err = 0.0;
  double q10_abs_err = 0.0;
  double q90_abs_err = 0.0;
  double mean_sq_err = 0.0;   // E|g_k - g*_k|^2 over seeds
  double bayes_gap_sq = 0.0;  // mean of (g_k - g*_k)^2, the excess conditional MSE of g_k
  /// Same excess measured from realized losses: mean of
  /// (X - g_k)^2 - (X - g*_k)^2 with X = X_{zeta_k + 1}. Noisy; unbiased.
  double realized_excess_loss = 0.0;
};

struct ErrorCurve {
  std::vector<CurveRow> rows;  // k = 1..k_max, rows with zero seeds omitted
  bool has_oracle = false;
};

/// Per-k aggregates over seeds. `per_seed[s]` is seed s's records in k order.
[[nodiscard]] ErrorCurve error_curves(const std::vector<std::vector<PredictionRecord>>& per_seed,
                                      Level k_max);

}  // namespace intermittent
