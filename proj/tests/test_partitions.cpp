#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "intermittent/partitions.hpp"

using namespace intermittent;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PartitionFamily dyadic_2k() { return PartitionFamily(DyadicFinite{0.0, 1.0, Pow2Cells{LinearExponent{1.0, 0.0}}}); }

// Bisection on [0, 1): the cell index after e halvings.
std::int64_t bisect_index(double x, int e) {
  double lo = 0.0;
  double hi = 1.0;
  std::int64_t idx = 0;
  for (int i = 0; i < e; ++i) {
    const double mid = 0.5 * (lo + hi);
    idx *= 2;
    if (x >= mid) {
      lo = mid;
      idx += 1;
    } else {
      hi = mid;
    }
  }
  return idx;
}

std::vector<PartitionFamily> nested_families() {
  return {
      PartitionFamily::example2(),
      dyadic_2k(),
      PartitionFamily(DyadicFinite{-2.0, 3.0, Pow2Cells{LinearExponent{0.5, 1.0}}}),
      PartitionFamily(DyadicFinite{0.0, 1.0, CountTable{{1, 3, 6, 12, 60, 120, 360}}}),
      PartitionFamily(DyadicInfinite{LinearExponent{1.0, 0.0}}),
      PartitionFamily(DyadicInfinite{LogLogExponent{2.0}}),
      PartitionFamily(FiniteAlphabetExact{{-1.0, 0.0, 0.5, 2.0}}),
  };
}

}  // namespace

TEST_CASE("dyadic cells at the first two levels") {
  const auto fam = dyadic_2k();
  const Cell c1 = fam.cell_of(0.3, 1);
  CHECK(c1.lower == 0.0);
  CHECK(c1.upper == 0.5);
  CHECK(c1.lower_closed);
  CHECK_FALSE(c1.upper_closed);
  const Cell c2 = fam.cell_of(0.3, 2);
  CHECK(c2.lower == 0.25);
  CHECK(c2.upper == 0.5);
}

TEST_CASE("finite alphabet gives point cells") {
  const auto fam = PartitionFamily::binary();
  for (Level k = 1; k <= 10; ++k) {
    const Cell c = fam.cell_of(1.0, k);
    CHECK(c.lower == 1.0);
    CHECK(c.upper == 1.0);
    CHECK(c.lower_closed);
    CHECK(c.upper_closed);
    CHECK(diam(c) == 0.0);
  }
  CHECK(fam.exact_alphabet());
  // gaps between symbols are open intervals
  const Cell gap = fam.cell_of(0.5, 3);
  CHECK(gap.lower == 0.0);
  CHECK(gap.upper == 1.0);
  CHECK_FALSE(gap.contains(0.0));
  CHECK(gap.contains(0.5));
  CHECK(fam.cell_of(-3.0, 1).lower == -kInf);
}

TEST_CASE("diam") {
  CHECK(diam(Cell{0.25, 0.5, true, false, 2, 1}) == 0.25);
  CHECK(diam(Cell{-kInf, 0.0, false, false, 1, -1}) == kInf);
  CHECK(diam(Cell{1.0, 1.0, true, true, 1, 3}) == 0.0);
}

TEST_CASE("quantize_block") {
  const auto fam = dyadic_2k();
  const std::vector<double> xs{0.3, 0.7};
  const auto cells = quantize_block(fam, xs, 1);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].lower == 0.0);
  CHECK(cells[0].upper == 0.5);
  CHECK(cells[1].lower == 0.5);
  CHECK(cells[1].upper == 1.0);
  CHECK(quantize_block(fam, std::vector<double>{}, 4).empty());
  const auto one = quantize_block(fam, std::vector<double>{0.3}, 2);
  REQUIRE(one.size() == 1);
  CHECK(one[0].lower == 0.25);
  CHECK(one[0].upper == 0.5);
}

TEST_CASE("cell_count") {
  const PartitionFamily tenth(DyadicFinite{0.0, 1.0, Pow2Cells{LinearExponent{0.1, 0.0}}});
  CHECK(tenth.cell_count(10) == std::optional<std::uint64_t>{2});
  CHECK(tenth.cell_count(9) == std::optional<std::uint64_t>{1});
  CHECK(tenth.cell_count(20) == std::optional<std::uint64_t>{4});
  for (Level k = 1; k < 50; ++k) CHECK(PartitionFamily::binary().cell_count(k) == std::optional<std::uint64_t>{2});
  CHECK_FALSE(PartitionFamily(DyadicInfinite{}).cell_count(3).has_value());
  CHECK_FALSE(PartitionFamily(DyadicInfinite{}).finite());

  // default preset: exponent floor(1 + log2(1 + log2(1 + k)))
  const auto ex2 = PartitionFamily::example2();
  for (Level k = 1; k <= 1000; ++k) {
    const double f = 1.0 + std::log2(1.0 + std::log2(1.0 + static_cast<double>(k)));
    CHECK(*ex2.cell_count(k) == (std::uint64_t{1} << static_cast<int>(std::floor(f))));
  }
}

TEST_CASE("dyadic index matches bisection") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto fam = dyadic_2k();
  for (int trial = 0; trial < 2000; ++trial) {
    const double x = u(gen);
    for (Level k = 1; k <= 30; ++k) CHECK(fam.index_of(x, k) == bisect_index(x, static_cast<int>(k)));
  }
  // exact dyadic endpoints belong to the cell on their right
  CHECK(fam.index_of(0.5, 1) == 1);
  CHECK(fam.index_of(0.25, 2) == 1);
  CHECK(fam.index_of(0.0, 5) == 0);
}

TEST_CASE("errors") {
  const auto fam = dyadic_2k();
  CHECK_THROWS_AS((void)fam.cell_of(std::nan(""), 1), std::domain_error);
  CHECK_THROWS_AS((void)fam.cell_of(kInf, 1), std::domain_error);
  CHECK_THROWS_AS((void)fam.cell_of(0.3, 0), std::invalid_argument);
  CHECK_THROWS_AS(PartitionFamily(DyadicFinite{0.0, 1.0, CountTable{{2, 3}}}), std::invalid_argument);
  CHECK_THROWS_AS(PartitionFamily(DyadicFinite{0.0, 1.0, Pow2Cells{TableExponent{{2, 1}}}}), std::invalid_argument);
  CHECK_THROWS_AS(PartitionFamily(DyadicFinite{1.0, 1.0, Pow2Cells{LinearExponent{}}}), std::invalid_argument);
  CHECK_THROWS_AS(PartitionFamily(FiniteAlphabetExact{{1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PartitionFamily(FiniteAlphabetExact{{}}), std::invalid_argument);
}

TEST_CASE("nestedness") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-3.0, 4.0);
  for (const auto& fam : nested_families()) {
    for (int trial = 0; trial < 10000; ++trial) {
      double x = u(gen);
      if (fam.exact_alphabet() && trial % 2 == 0) x = std::get<FiniteAlphabetExact>(fam.kind()).alphabet[trial % 4];
      for (Level k = 1; k <= 20; ++k) {
        const Cell outer = fam.cell_of(x, k);
        const Cell inner = fam.cell_of(x, k + 1);
        REQUIRE(outer.contains(x));
        REQUIRE(inner.contains(x));
        REQUIRE(is_subset(inner, outer));
      }
    }
  }
}

TEST_CASE("shrinkage") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<PartitionFamily> shrinking{dyadic_2k(), PartitionFamily(DyadicInfinite{LinearExponent{}})};
  for (const auto& fam : shrinking) {
    for (int trial = 0; trial < 1000; ++trial) {
      const double x = u(gen);
      double prev = kInf;
      for (Level k = 1; k <= 40; ++k) {
        const double d = diam(fam.cell_of(x, k));
        CHECK(d <= prev);
        prev = d;
      }
      CHECK(diam(fam.cell_of(x, 11)) < 1e-3);
    }
  }
  // the default preset shrinks too, just slowly: never increasing
  const auto ex2 = PartitionFamily::example2();
  for (int trial = 0; trial < 200; ++trial) {
    const double x = u(gen);
    double prev = kInf;
    for (Level k = 1; k <= 5000; k += 7) {
      const double d = diam(ex2.cell_of(x, k));
      CHECK(d <= prev);
      prev = d;
    }
    CHECK(prev <= 1.0 / 16.0);
  }
}

TEST_CASE("partition property") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-3.0, 4.0);
  for (const auto& fam : nested_families()) {
    for (int trial = 0; trial < 5000; ++trial) {
      const double x = u(gen);
      const double y = trial % 3 == 0 ? x + 1e-3 * u(gen) : u(gen);
      const Level k = 1 + static_cast<Level>(trial % 12);
      const Cell cx = fam.cell_of(x, k);
      const Cell cy = fam.cell_of(y, k);
      if (cx == cy) {
        CHECK(cx.contains(y));
        CHECK(cx.lower == cy.lower);
        CHECK(cx.upper == cy.upper);
      } else {
        CHECK_FALSE(cx.contains(y));
        CHECK_FALSE(cy.contains(x));
      }
    }
  }
}
