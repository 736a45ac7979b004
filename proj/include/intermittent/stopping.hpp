#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "intermittent/partitions.hpp"

namespace intermittent {

/// l_k = k.
struct LinearLag {};

/// l_k = min(k, max(1, floor(c * log2 k))).
struct LogFloorLag {
  double c = 3.0;
};

/// Explicit l_1, l_2, ... up to the table's horizon.
struct CustomLag {
  std::vector<std::uint64_t> table;
};

/// Raised when a finite (custom) schedule is asked for a level past its table.
class HorizonError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Nondecreasing block lengths with 1 <= l_k <= k.
class LagSchedule {
 public:
  using Rule = std::variant<LinearLag, LogFloorLag, CustomLag>;

  explicit LagSchedule(Rule rule);

  static LagSchedule linear() { return LagSchedule(LinearLag{}); }
  static LagSchedule log_floor(double c) { return LagSchedule(LogFloorLag{c}); }

  [[nodiscard]] std::uint64_t lag(Level k) const;

  /// Last level the schedule can answer for; nullopt for rule-based schedules.
  [[nodiscard]] std::optional<Level> horizon() const;

  [[nodiscard]] const Rule& rule() const { return rule_; }

 private:
  Rule rule_;
};

/// J(n): the smallest j >= 1 with l_{j+1} > n.
///
/// Throws HorizonError when a custom table runs out first and
/// std::overflow_error when the answer does not fit in 64 bits.
[[nodiscard]] Level j_of_n(const LagSchedule& schedule, std::uint64_t n);

/// eta_k and zeta_k = zeta_{k-1} + eta_k for one completed stopping time.
struct ScanEvent {
  Level k = 0;
  std::uint64_t eta = 0;
  std::uint64_t zeta = 0;

  friend bool operator==(const ScanEvent&, const ScanEvent&) = default;
};

/// Incremental scanner for the recursive stopping times.
///
/// For level k the pattern is the level-k quantization of
/// x[zeta_{k-1} - l_k + 1 .. zeta_{k-1}]; eta_k is the least t > 0 at which the
/// window shifted by t quantizes to the same cells. Matching runs
/// Knuth-Morris-Pratt over the quantized stream starting at
/// zeta_{k-1} - l_k + 2, so each sample is quantized and compared O(1)
/// amortized times per level. Only the last k + 1 samples are retained.
class Scanner {
 public:
  Scanner(PartitionFamily family, LagSchedule schedule);

  /// Feed x_n with n = samples_seen(). Returns the event when x_n completes
  /// a match (then zeta_k = n). At most one event per sample.
  std::optional<ScanEvent> push(double x);

  /// Index of the stopping time currently being searched for.
  [[nodiscard]] Level next_k() const { return k_; }
  [[nodiscard]] std::uint64_t zeta_prev() const { return zeta_prev_; }
  [[nodiscard]] std::uint64_t samples_seen() const { return seen_; }

  /// Retained suffix of the history and the absolute index of its first entry.
  [[nodiscard]] std::span<const double> history() const { return history_; }
  [[nodiscard]] std::uint64_t history_begin() const { return base_; }

  [[nodiscard]] const PartitionFamily& family() const { return family_; }
  [[nodiscard]] const LagSchedule& schedule() const { return schedule_; }

 private:
  void arm();
  [[nodiscard]] double at(std::uint64_t index) const { return history_[index - base_]; }
  void trim();

  PartitionFamily family_;
  LagSchedule schedule_;
  Level k_ = 1;
  std::uint64_t zeta_prev_ = 0;
  std::uint64_t seen_ = 0;
  std::vector<double> history_;
  std::uint64_t base_ = 0;

  bool armed_ = false;
  LevelQuantizer quantizer_;
  std::vector<std::int64_t> pattern_;
  std::vector<std::size_t> failure_;
  std::size_t matched_ = 0;
  std::uint64_t text_next_ = 0;
};

/// The supplier ran dry before the current stopping time was found. The
/// scanner keeps its partial progress; pushing more samples resumes the scan.
struct Truncated {
  Level k = 0;
  std::uint64_t samples_consumed = 0;
};

using SampleSource = std::function<std::optional<double>()>;
using ScanOutcome = std::variant<ScanEvent, Truncated>;

/// Pull samples from `more` until the next stopping time is certified.
ScanOutcome scan_next(Scanner& scanner, const SampleSource& more);

struct ReverseStep {
  std::uint64_t eta = 0;
  std::int64_t zeta = 0;
};

struct ReverseScan {
  std::vector<ReverseStep> steps;  // i = 1..k, or fewer when truncated
  bool truncated = false;
};

/// Backward stopping times hat-eta^k_i, hat-zeta^k_i on a suffix whose last
/// element is time 0 and first element is time -(size - 1).
///
/// Step i compares blocks of length l_{k-i+1} at level k-i+1, searching
/// backwards from hat-zeta^k_{i-1}. Direct comparison, no shared machinery
/// with Scanner, so the two can check each other.
[[nodiscard]] ReverseScan reverse_scan(std::span<const double> suffix, const PartitionFamily& family,
                                       const LagSchedule& schedule, Level k);

}  // namespace intermittent
