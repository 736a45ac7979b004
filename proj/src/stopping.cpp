#include "intermittent/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace intermittent {

namespace {

constexpr Level kSearchCeiling = Level{1} << 62;
constexpr std::size_t kTrimSlack = 4096;

}  // namespace

LagSchedule::LagSchedule(Rule rule) : rule_(std::move(rule)) {
  if (const auto* r = std::get_if<LogFloorLag>(&rule_)) {
    if (!std::isfinite(r->c) || r->c <= 0.0)
      throw std::invalid_argument("log_floor schedule: c must be a positive real");
  } else if (const auto* t = std::get_if<CustomLag>(&rule_)) {
    if (t->table.empty()) throw std::invalid_argument("custom schedule: empty table");
    for (std::size_t i = 0; i < t->table.size(); ++i) {
      const std::uint64_t k = i + 1;
      const std::uint64_t l = t->table[i];
      if (l < 1 || l > k)
        throw std::invalid_argument("custom schedule: need 1 <= l_k <= k (k=" + std::to_string(k) +
                                    ", l_k=" + std::to_string(l) + ")");
      if (i > 0 && l < t->table[i - 1])
        throw std::invalid_argument("custom schedule: l_k must be nondecreasing");
    }
  }
}

std::uint64_t LagSchedule::lag(Level k) const {
  if (k < 1) throw std::invalid_argument("lag schedule: k must be >= 1");
  if (std::holds_alternative<LinearLag>(rule_)) return k;
  if (const auto* r = std::get_if<LogFloorLag>(&rule_)) {
    const double v = std::floor(r->c * std::log2(static_cast<double>(k)));
    const std::uint64_t l = v < 1.0 ? 1 : static_cast<std::uint64_t>(v);
    return std::min<std::uint64_t>(l, k);
  }
  const auto& table = std::get<CustomLag>(rule_).table;
  if (k > table.size())
    throw HorizonError("custom schedule exhausted at k=" + std::to_string(k));
  return table[k - 1];
}

std::optional<Level> LagSchedule::horizon() const {
  if (const auto* t = std::get_if<CustomLag>(&rule_)) return t->table.size();
  return std::nullopt;
}

Level j_of_n(const LagSchedule& schedule, std::uint64_t n) {
  if (std::holds_alternative<LinearLag>(schedule.rule())) return std::max<std::uint64_t>(1, n);
  if (std::holds_alternative<CustomLag>(schedule.rule())) {
    for (Level j = 1;; ++j) {
      if (schedule.lag(j + 1) > n) return j;  // throws HorizonError past the table
    }
  }
  // Nondecreasing lags: gallop to an upper bound, then bisect.
  auto ok = [&](Level j) { return schedule.lag(j + 1) > n; };
  Level hi = 1;
  while (!ok(hi)) {
    if (hi >= kSearchCeiling) throw std::overflow_error("J(n) exceeds 2^62");
    hi *= 2;
  }
  Level lo = hi / 2 + 1;
  if (hi == 1) lo = 1;
  while (lo < hi) {
    const Level mid = lo + (hi - lo) / 2;
    if (ok(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

Scanner::Scanner(PartitionFamily family, LagSchedule schedule)
    : family_(std::move(family)), schedule_(std::move(schedule)) {}

void Scanner::arm() {
  const std::uint64_t len = schedule_.lag(k_);
  // 1 <= l_k <= k and zeta_{k-1} >= k - 1 keep the pattern inside x_0..
  if (len > zeta_prev_ + 1)
    throw std::logic_error("scanner: block of length " + std::to_string(len) +
                           " does not fit before zeta=" + std::to_string(zeta_prev_));
  quantizer_ = family_.quantizer(k_);
  const std::uint64_t start = zeta_prev_ + 1 - len;
  pattern_.resize(len);
  for (std::uint64_t i = 0; i < len; ++i) pattern_[i] = quantizer_(at(start + i));

  failure_.assign(len, 0);
  for (std::size_t i = 1, m = 0; i < len; ++i) {
    while (m > 0 && pattern_[i] != pattern_[m]) m = failure_[m - 1];
    if (pattern_[i] == pattern_[m]) ++m;
    failure_[i] = m;
  }
  matched_ = 0;
  text_next_ = start + 1;
  armed_ = true;
}

void Scanner::trim() {
  const std::uint64_t keep_from = seen_ >= k_ ? seen_ - k_ : 0;
  if (keep_from <= base_) return;
  const std::uint64_t drop = keep_from - base_;
  if (drop < kTrimSlack || drop < history_.size() / 2) return;
  history_.erase(history_.begin(), history_.begin() + static_cast<std::ptrdiff_t>(drop));
  base_ = keep_from;
}

std::optional<ScanEvent> Scanner::push(double x) {
  history_.push_back(x);
  const std::uint64_t n = seen_++;
  if (!armed_) {
    if (n < zeta_prev_) return std::nullopt;
    arm();
  }
  while (text_next_ <= n) {
    const std::int64_t c = quantizer_(at(text_next_));
    while (matched_ > 0 && pattern_[matched_] != c) matched_ = failure_[matched_ - 1];
    if (pattern_[matched_] == c) ++matched_;
    const std::uint64_t end = text_next_++;
    if (matched_ == pattern_.size()) {
      const ScanEvent ev{k_, end - zeta_prev_, end};
      zeta_prev_ = end;
      ++k_;
      armed_ = false;
      trim();
      return ev;
    }
  }
  trim();
  return std::nullopt;
}

ScanOutcome scan_next(Scanner& scanner, const SampleSource& more) {
  for (;;) {
    const std::optional<double> x = more();
    if (!x) return Truncated{scanner.next_k(), scanner.samples_seen()};
    if (auto ev = scanner.push(*x)) return *ev;
  }
}

ReverseScan reverse_scan(std::span<const double> suffix, const PartitionFamily& family,
                         const LagSchedule& schedule, Level k) {
  ReverseScan out;
  if (k == 0) return out;
  if (suffix.empty()) {
    out.truncated = true;
    return out;
  }
  const auto m = static_cast<std::int64_t>(suffix.size()) - 1;
  auto value = [&](std::int64_t time) { return suffix[static_cast<std::size_t>(time + m)]; };

  std::int64_t zeta = 0;
  for (Level i = 1; i <= k; ++i) {
    const Level level = k - i + 1;
    const auto len = static_cast<std::int64_t>(schedule.lag(level));
    const LevelQuantizer q = family.quantizer(level);
    const std::int64_t start = zeta - len + 1;
    if (start < -m) {
      out.truncated = true;
      return out;
    }
    std::vector<std::int64_t> block(static_cast<std::size_t>(len));
    for (std::int64_t j = 0; j < len; ++j) block[static_cast<std::size_t>(j)] = q(value(start + j));

    std::int64_t t = 1;
    for (;; ++t) {
      if (start - t < -m) {
        out.truncated = true;
        return out;
      }
      bool equal = true;
      for (std::int64_t j = len - 1; j >= 0; --j) {
        if (q(value(start - t + j)) != block[static_cast<std::size_t>(j)]) {
          equal = false;
          break;
        }
      }
      if (equal) break;
    }
    zeta -= t;
    out.steps.push_back(ReverseStep{static_cast<std::uint64_t>(t), zeta});
  }
  return out;
}

}  // namespace intermittent
