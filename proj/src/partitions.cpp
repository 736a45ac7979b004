#include "intermittent/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace intermittent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxFiniteExponent = 62;
constexpr double kMaxGridIndex = 9007199254740992.0;  // 2^53

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double x) {
  if (!std::isfinite(x)) throw std::domain_error("quantizer: non-finite sample");
}

void validate_exponent(const ExponentRule& rule) {
  std::visit(Overloaded{
                 [](const LinearExponent& r) {
                   if (!std::isfinite(r.slope) || !std::isfinite(r.offset) || r.slope < 0.0)
                     throw std::invalid_argument("linear exponent: slope must be finite and >= 0");
                 },
                 [](const LogLogExponent& r) {
                   if (!std::isfinite(r.offset))
                     throw std::invalid_argument("loglog exponent: offset must be finite");
                 },
                 [](const TableExponent& r) {
                   if (r.values.empty()) throw std::invalid_argument("exponent table is empty");
                   if (!std::is_sorted(r.values.begin(), r.values.end()))
                     throw std::invalid_argument("exponent table must be nondecreasing");
                 },
             },
             rule);
}

std::uint64_t count_table_at(const CountTable& t, Level k) {
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(k - 1), t.counts.size() - 1);
  return t.counts[i];
}

void require_level(Level k) {
  if (k < 1) throw std::invalid_argument("partition level must be >= 1");
}

}  // namespace

bool Cell::contains(double x) const {
  const bool above = lower_closed ? x >= lower : x > lower;
  const bool below = upper_closed ? x <= upper : x < upper;
  return above && below;
}

double diam(const Cell& c) {
  if (std::isinf(c.lower) || std::isinf(c.upper)) return kInf;
  return c.upper - c.lower;
}

bool is_subset(const Cell& inner, const Cell& outer) {
  const bool lower_ok = inner.lower > outer.lower ||
                        (inner.lower == outer.lower && (outer.lower_closed || !inner.lower_closed));
  const bool upper_ok = inner.upper < outer.upper ||
                        (inner.upper == outer.upper && (outer.upper_closed || !inner.upper_closed));
  return lower_ok && upper_ok;
}

int exponent_at(const ExponentRule& rule, Level k) {
  require_level(k);
  const double kd = static_cast<double>(k);
  const double f = std::visit(
      Overloaded{
          [&](const LinearExponent& r) { return r.slope * kd + r.offset; },
          [&](const LogLogExponent& r) { return r.offset + std::log2(1.0 + std::log2(1.0 + kd)); },
          [&](const TableExponent& r) {
            const auto i = std::min<std::size_t>(static_cast<std::size_t>(k - 1), r.values.size() - 1);
            return static_cast<double>(r.values[i]);
          },
      },
      rule);
  const double e = std::floor(f);
  if (e <= 0.0) return 0;
  if (e > static_cast<double>(std::numeric_limits<int>::max() / 2))
    throw std::domain_error("partition exponent overflow at level " + std::to_string(k));
  return static_cast<int>(e);
}

std::int64_t LevelQuantizer::operator()(double x) const {
  require_finite(x);
  switch (mode_) {
    case Mode::Range: {
      if (x < lo_) return -1;
      if (x >= hi_) return static_cast<std::int64_t>(count_);
      const double t = (x - lo_) / (hi_ - lo_);
      const double scaled = pow2_ ? std::ldexp(t, exponent_) : t * static_cast<double>(count_);
      auto i = static_cast<std::uint64_t>(scaled);
      if (i >= count_) i = count_ - 1;
      return static_cast<std::int64_t>(i);
    }
    case Mode::Grid: {
      const double scaled = std::floor(std::ldexp(x, exponent_));
      if (std::fabs(scaled) >= kMaxGridIndex)
        throw std::domain_error("dyadic grid index out of range at level " + std::to_string(level_));
      return static_cast<std::int64_t>(scaled);
    }
    case Mode::Alphabet: {
      const auto& a = *alphabet_;
      const auto it = std::lower_bound(a.begin(), a.end(), x);
      const auto i = static_cast<std::int64_t>(it - a.begin());
      if (it != a.end() && *it == x) return 2 * i + 1;
      return 2 * i;
    }
  }
  return 0;
}

PartitionFamily::PartitionFamily(Kind kind) : kind_(std::move(kind)) {
  std::visit(Overloaded{
                 [](const DyadicFinite& f) {
                   if (!std::isfinite(f.lo) || !std::isfinite(f.hi) || !(f.lo < f.hi))
                     throw std::invalid_argument("dyadic_finite: need finite lo < hi");
                   std::visit(Overloaded{
                                  [](const Pow2Cells& c) { validate_exponent(c.exponent); },
                                  [](const CountTable& c) {
                                    if (c.counts.empty())
                                      throw std::invalid_argument("cell count table is empty");
                                    for (std::size_t i = 0; i < c.counts.size(); ++i) {
                                      if (c.counts[i] == 0)
                                        throw std::invalid_argument("cell counts must be >= 1");
                                      if (i > 0 && c.counts[i] % c.counts[i - 1] != 0)
                                        throw std::invalid_argument(
                                            "cell counts must each divide the next (nestedness)");
                                    }
                                  },
                              },
                              f.cells);
                 },
                 [](const DyadicInfinite& f) { validate_exponent(f.resolution); },
                 [](const FiniteAlphabetExact& f) {
                   if (f.alphabet.empty()) throw std::invalid_argument("finite_alphabet: empty alphabet");
                   for (double a : f.alphabet) require_finite(a);
                   if (std::adjacent_find(f.alphabet.begin(), f.alphabet.end(),
                                          [](double a, double b) { return !(a < b); }) !=
                       f.alphabet.end())
                     throw std::invalid_argument("finite_alphabet: alphabet must be strictly increasing");
                 },
             },
             kind_);
  if (const auto* a = std::get_if<FiniteAlphabetExact>(&kind_))
    alphabet_ = std::make_shared<const std::vector<double>>(a->alphabet);
}

PartitionFamily PartitionFamily::example2(double lo, double hi) {
  return PartitionFamily(DyadicFinite{lo, hi, Pow2Cells{LogLogExponent{1.0}}});
}

PartitionFamily PartitionFamily::binary() { return PartitionFamily(FiniteAlphabetExact{{0.0, 1.0}}); }

LevelQuantizer PartitionFamily::quantizer(Level k) const {
  require_level(k);
  LevelQuantizer q;
  q.level_ = k;
  std::visit(Overloaded{
                 [&](const DyadicFinite& f) {
                   q.mode_ = LevelQuantizer::Mode::Range;
                   q.lo_ = f.lo;
                   q.hi_ = f.hi;
                   if (const auto* p = std::get_if<Pow2Cells>(&f.cells)) {
                     q.exponent_ = exponent_at(p->exponent, k);
                     if (q.exponent_ > kMaxFiniteExponent)
                       throw std::domain_error("dyadic_finite: more than 2^62 cells at level " +
                                               std::to_string(k));
                     q.count_ = std::uint64_t{1} << q.exponent_;
                     q.pow2_ = true;
                   } else {
                     q.count_ = count_table_at(std::get<CountTable>(f.cells), k);
                     q.pow2_ = false;
                   }
                 },
                 [&](const DyadicInfinite& f) {
                   q.mode_ = LevelQuantizer::Mode::Grid;
                   q.exponent_ = exponent_at(f.resolution, k);
                 },
                 [&](const FiniteAlphabetExact&) {
                   q.mode_ = LevelQuantizer::Mode::Alphabet;
                   q.alphabet_ = alphabet_;
                 },
             },
             kind_);
  return q;
}

std::int64_t PartitionFamily::index_of(double x, Level k) const { return quantizer(k)(x); }

Cell PartitionFamily::cell_of(double x, Level k) const {
  const LevelQuantizer q = quantizer(k);
  const std::int64_t i = q(x);
  Cell c;
  c.level = k;
  c.index = i;
  std::visit(Overloaded{
                 [&](const DyadicFinite& f) {
                   const auto n = static_cast<std::int64_t>(q.count_);
                   if (i < 0) {
                     c = Cell{-kInf, f.lo, false, false, k, i};
                   } else if (i >= n) {
                     c = Cell{f.hi, kInf, true, false, k, i};
                   } else {
                     const double span = f.hi - f.lo;
                     auto frac = [&](std::int64_t j) {
                       return q.pow2_ ? std::ldexp(static_cast<double>(j), -q.exponent_)
                                      : static_cast<double>(j) / static_cast<double>(n);
                     };
                     const double lower = i == 0 ? f.lo : f.lo + span * frac(i);
                     const double upper = i + 1 == n ? f.hi : f.lo + span * frac(i + 1);
                     c = Cell{lower, upper, true, false, k, i};
                   }
                 },
                 [&](const DyadicInfinite&) {
                   const double lower = std::ldexp(static_cast<double>(i), -q.exponent_);
                   const double upper = std::ldexp(static_cast<double>(i + 1), -q.exponent_);
                   c = Cell{lower, upper, true, false, k, i};
                 },
                 [&](const FiniteAlphabetExact& f) {
                   const auto& a = f.alphabet;
                   const auto n = static_cast<std::int64_t>(a.size());
                   if (i % 2 == 1) {
                     const double v = a[static_cast<std::size_t>(i / 2)];
                     c = Cell{v, v, true, true, k, i};
                   } else {
                     const std::int64_t gap = i / 2;  // gap before symbol `gap`
                     const double lower = gap == 0 ? -kInf : a[static_cast<std::size_t>(gap - 1)];
                     const double upper = gap == n ? kInf : a[static_cast<std::size_t>(gap)];
                     c = Cell{lower, upper, false, false, k, i};
                   }
                 },
             },
             kind_);
  return c;
}

std::optional<std::uint64_t> PartitionFamily::cell_count(Level k) const {
  require_level(k);
  return std::visit(Overloaded{
                        [&](const DyadicFinite&) -> std::optional<std::uint64_t> {
                          return quantizer(k).count_;
                        },
                        [](const DyadicInfinite&) -> std::optional<std::uint64_t> { return std::nullopt; },
                        [](const FiniteAlphabetExact& f) -> std::optional<std::uint64_t> {
                          return f.alphabet.size();
                        },
                    },
                    kind_);
}

bool PartitionFamily::exact_alphabet() const { return std::holds_alternative<FiniteAlphabetExact>(kind_); }

bool PartitionFamily::finite() const { return !std::holds_alternative<DyadicInfinite>(kind_); }

std::vector<Cell> quantize_block(const PartitionFamily& family, std::span<const double> xs, Level k) {
  std::vector<Cell> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(family.cell_of(x, k));
  return out;
}

}  // namespace intermittent
