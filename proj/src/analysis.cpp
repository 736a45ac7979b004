#include "intermittent/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace intermittent {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

DStar dstar(std::span<const double> a, std::span<const double> b, std::size_t depth, bool eventually_equal) {
  if (a.size() <= depth || b.size() <= depth)
    throw std::invalid_argument("dstar: both sequences need coordinates 0..-depth");
  DStar out;
  for (std::size_t i = 0; i <= depth; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    out.value += std::ldexp(d / (1.0 + d), -static_cast<int>(i) - 1);
  }
  out.tail_bound = eventually_equal ? 0.0 : std::ldexp(1.0, -static_cast<int>(depth) - 1);
  return out;
}

GrowthBoundSpec::GrowthBoundSpec(double eps, PartitionFamily fam, LagSchedule sched)
    : epsilon(eps), family(std::move(fam)), schedule(std::move(sched)) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0)
    throw std::invalid_argument("growth bound: epsilon must be a positive real");
}

GrowthBound growth_bound(std::uint64_t cells, std::uint64_t lag, double epsilon) {
  if (lag == 0) throw std::invalid_argument("growth bound: l_k must be >= 1");
  if (cells == 0) throw std::invalid_argument("growth bound: |P_k| must be >= 1");
  if (!std::isfinite(epsilon) || epsilon <= 0.0)
    throw std::invalid_argument("growth bound: epsilon must be a positive real");
  GrowthBound out;
  out.log2 = static_cast<double>(lag) * (std::log2(static_cast<double>(cells)) + epsilon);
  out.value = out.log2 >= 1024.0 ? std::numeric_limits<double>::max() : std::exp2(out.log2);
  return out;
}

GrowthBound growth_bound(const GrowthBoundSpec& spec, Level k) {
  const auto cells = spec.family.cell_count(k);
  if (!cells) throw std::domain_error("growth bound: needs a family of finite partitions");
  return growth_bound(*cells, spec.schedule.lag(k), spec.epsilon);
}

double violation_ceiling(const GrowthBoundSpec& spec, Level k) {
  const double l = static_cast<double>(spec.schedule.lag(k));
  return static_cast<double>(k + 1) * std::exp2(-l * spec.epsilon);
}

Summability check_summability(const GrowthBoundSpec& spec, Level horizon) {
  Summability out;
  const auto& rule = spec.schedule.rule();
  if (std::holds_alternative<LinearLag>(rule)) {
    out.symbolic = true;
  } else if (const auto* r = std::get_if<LogFloorLag>(&rule)) {
    // c log2 k - 1 <= l_k <= c log2 k eventually, so the terms behave like k^{1 - c eps}.
    out.symbolic = r->c * spec.epsilon > 2.0;
  }
  Level last = horizon;
  if (const auto h = spec.schedule.horizon()) last = std::min(last, *h);
  for (Level k = 1; k <= last; ++k) out.partial_sum += violation_ceiling(spec, k);
  out.terms = last;
  return out;
}

std::vector<ViolationRow> bound_violation_rate(const std::vector<std::vector<ScanEvent>>& per_seed,
                                               const GrowthBoundSpec& spec, Level k_min, Level k_max,
                                               std::uint64_t horizon) {
  if (k_min < 1) k_min = 1;
  std::vector<ViolationRow> rows;
  for (Level k = k_min; k <= k_max; ++k) {
    const GrowthBound bound = growth_bound(spec, k);
    ViolationRow row;
    row.k = k;
    row.bound_log2 = bound.log2;
    row.ceiling = violation_ceiling(spec, k);
    for (const auto& events : per_seed) {
      if (events.size() >= k) {
        const ScanEvent& ev = events[k - 1];
        if (ev.k != k) throw std::invalid_argument("bound_violation_rate: events out of order");
        ++row.n_seeds;
        if (static_cast<double>(ev.zeta) >= bound.value) ++row.violations;
      } else if (static_cast<double>(horizon) >= bound.value) {
        ++row.n_seeds;
        ++row.violations;
      } else {
        ++row.censored;
      }
    }
    if (row.n_seeds > 0) {
      const double n = static_cast<double>(row.n_seeds);
      row.rate = static_cast<double>(row.violations) / n;
      row.std_error = std::sqrt(row.rate * (1.0 - row.rate) / n);
      row.within_tolerance = row.rate <= row.ceiling + 3.0 * row.std_error;
    } else {
      row.rate = kNaN;
      row.std_error = kNaN;
      row.within_tolerance = false;
    }
    rows.push_back(row);
  }
  return rows;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: samples must be nonempty");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double ks_distance_to_cdf(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_distance_to_cdf: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double c_alpha) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return c_alpha * std::sqrt((dn + dm) / (dn * dm));
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2) return kNaN;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean_of(rx);
  const double my = mean_of(ry);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ErrorCurve error_curves(const std::vector<std::vector<PredictionRecord>>& per_seed, Level k_max) {
  ErrorCurve curve;
  for (Level k = 1; k <= k_max; ++k) {
    std::vector<double> g;
    std::vector<double> zeta;
    std::vector<double> abs_err;
    std::vector<double> sq_err;
    std::vector<double> excess;
    for (const auto& records : per_seed) {
      if (records.size() < k) continue;
      const PredictionRecord& r = records[k - 1];
      if (r.k != k) throw std::invalid_argument("error_curves: records out of order");
      g.push_back(r.g);
      zeta.push_back(static_cast<double>(r.zeta));
      if (r.oracle) {
        const double e = r.g - *r.oracle;
        abs_err.push_back(std::fabs(e));
        sq_err.push_back(e * e);
        if (r.next_value) {
          const double x = *r.next_value;
          excess.push_back((x - r.g) * (x - r.g) - (x - *r.oracle) * (x - *r.oracle));
        }
      }
    }
    if (g.empty()) continue;
    CurveRow row;
    row.k = k;
    row.n_seeds = g.size();
    row.g_median = median(g);
    row.zeta_median = median(zeta);
    row.median_abs_err = median(abs_err);
    row.mean_abs_err = mean_of(abs_err);
    row.q10_abs_err = quantile(abs_err, 0.1);
    row.q90_abs_err = quantile(abs_err, 0.9);
    row.mean_sq_err = mean_of(sq_err);
    row.bayes_gap_sq = row.mean_sq_err;
    row.realized_excess_loss = mean_of(excess);
    if (!abs_err.empty()) curve.has_oracle = true;
    curve.rows.push_back(row);
  }
  return curve;
}

}  // namespace intermittent
