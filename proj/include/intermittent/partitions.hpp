#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace intermittent {

/// Partition level k. Levels start at 1.
using Level = std::uint64_t;

/// One interval of a level-k partition.
///
/// Two cells are equal when they sit at the same level with the same index;
/// the endpoints are descriptive only. Block comparisons in the scanner rely
/// on this so that quantized equality never depends on floating endpoints.
struct Cell {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_closed = true;
  bool upper_closed = false;
  Level level = 1;
  std::int64_t index = 0;

  friend bool operator==(const Cell& a, const Cell& b) {
    return a.level == b.level && a.index == b.index;
  }

  [[nodiscard]] bool contains(double x) const;
};

/// sup |y - z| over the cell; +inf for unbounded cells, 0 for point cells.
[[nodiscard]] double diam(const Cell& c);

/// Set inclusion by endpoints (closedness respected).
[[nodiscard]] bool is_subset(const Cell& inner, const Cell& outer);

// Rules producing a nondecreasing integer exponent e(k) = floor(f(k)), clamped at 0.

/// f(k) = slope * k + offset.
struct LinearExponent {
  double slope = 1.0;
  double offset = 0.0;
};

/// f(k) = offset + log2(1 + log2(1 + k)); grows without bound, very slowly.
struct LogLogExponent {
  double offset = 1.0;
};

/// Explicit exponents for k = 1..size; the last entry holds beyond the table.
struct TableExponent {
  std::vector<int> values;
};

using ExponentRule = std::variant<LinearExponent, LogLogExponent, TableExponent>;

[[nodiscard]] int exponent_at(const ExponentRule& rule, Level k);

/// 2^{e(k)} equal cells.
struct Pow2Cells {
  ExponentRule exponent;
};

/// Explicit cell counts for k = 1..size, each a multiple of its predecessor.
struct CountTable {
  std::vector<std::uint64_t> counts;
};

using CellRule = std::variant<Pow2Cells, CountTable>;

/// [lo, hi) split into cells(k) equal half-open intervals, plus the two tails
/// (-inf, lo) and [hi, +inf).
struct DyadicFinite {
  double lo = 0.0;
  double hi = 1.0;
  CellRule cells = Pow2Cells{LogLogExponent{}};
};

/// The grid [j 2^{-e(k)}, (j+1) 2^{-e(k)}) over the whole real line.
struct DyadicInfinite {
  ExponentRule resolution = LinearExponent{};
};

/// Point cells at each alphabet symbol and open gaps between them; the same
/// partition at every level. Exempt from shrinkage: finite-alphabet data needs
/// no quantization.
struct FiniteAlphabetExact {
  std::vector<double> alphabet;
};

/// Quantizer for one fixed level. Cheap to copy; used on the scanner hot path.
class LevelQuantizer {
 public:
  [[nodiscard]] std::int64_t operator()(double x) const;
  [[nodiscard]] Level level() const { return level_; }

 private:
  friend class PartitionFamily;
  enum class Mode { Range, Grid, Alphabet };
  Mode mode_ = Mode::Range;
  Level level_ = 1;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::uint64_t count_ = 1;
  int exponent_ = 0;
  bool pow2_ = true;
  std::shared_ptr<const std::vector<double>> alphabet_;
};

/// Nested sequence of interval partitions {P_k} and the quantizer x -> [x]^k.
///
/// Construction validates nestedness: exponents must be nondecreasing and
/// table counts must divide their successors. Immutable afterwards.
class PartitionFamily {
 public:
  using Kind = std::variant<DyadicFinite, DyadicInfinite, FiniteAlphabetExact>;

  explicit PartitionFamily(Kind kind);

  /// Example-2 style default: [0,1) with 2^{floor(1 + log2(1 + log2(1 + k)))} cells.
  static PartitionFamily example2(double lo = 0.0, double hi = 1.0);
  static PartitionFamily binary();

  [[nodiscard]] Cell cell_of(double x, Level k) const;
  [[nodiscard]] std::int64_t index_of(double x, Level k) const;
  [[nodiscard]] LevelQuantizer quantizer(Level k) const;

  /// Cells covering the family's support: the [lo, hi) cells for DyadicFinite,
  /// the symbols for FiniteAlphabetExact. nullopt marks a countably infinite
  /// partition.
  [[nodiscard]] std::optional<std::uint64_t> cell_count(Level k) const;

  [[nodiscard]] bool exact_alphabet() const;
  [[nodiscard]] bool finite() const;
  [[nodiscard]] const Kind& kind() const { return kind_; }

 private:
  Kind kind_;
  std::shared_ptr<const std::vector<double>> alphabet_;
};

[[nodiscard]] std::vector<Cell> quantize_block(const PartitionFamily& family,
                                               std::span<const double> xs, Level k);

}  // namespace intermittent
