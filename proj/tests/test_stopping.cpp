#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "intermittent/stopping.hpp"
#include "oracles.hpp"

using namespace intermittent;
using oracle::brute_forward;
using oracle::random_path;

namespace {

const std::vector<double> kWorked{0, 1, 0, 0, 1, 0, 1, 1};

LagSchedule worked_schedule() { return LagSchedule(CustomLag{{1, 2, 2}}); }

std::vector<ScanEvent> scan_all(const std::vector<double>& x, const PartitionFamily& fam, const LagSchedule& sched,
                                Level k_max) {
  Scanner s(fam, sched);
  std::vector<ScanEvent> out;
  for (double v : x) {
    if (out.size() >= k_max) break;
    if (auto ev = s.push(v)) out.push_back(*ev);
  }
  return out;
}

}  // namespace

TEST_CASE("lag schedules") {
  const auto lin = LagSchedule::linear();
  for (Level k = 1; k < 100; ++k) CHECK(lin.lag(k) == k);
  const auto lf = LagSchedule::log_floor(3.0);
  CHECK(lf.lag(1) == 1);
  CHECK(lf.lag(2) == 2);  // floor(3 log2 2) = 3, clamped by l_k <= k
  CHECK(lf.lag(10) == 9);
  CHECK(lf.lag(200) == 22);
  std::uint64_t prev = 0;
  for (Level k = 1; k <= 100000; ++k) {
    const auto l = lf.lag(k);
    REQUIRE(l >= 1);
    REQUIRE(l <= k);
    REQUIRE(l >= prev);
    prev = l;
  }
  CHECK(lf.lag(1 << 20) > lf.lag(1 << 10));
  CHECK_FALSE(lf.horizon().has_value());
  CHECK(worked_schedule().horizon() == std::optional<Level>{3});
  CHECK_THROWS_AS((void)worked_schedule().lag(4), HorizonError);
  CHECK_THROWS_AS(LagSchedule(CustomLag{{2}}), std::invalid_argument);
  CHECK_THROWS_AS(LagSchedule(CustomLag{{1, 2, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(LagSchedule(CustomLag{{0}}), std::invalid_argument);
  CHECK_THROWS_AS(LagSchedule::log_floor(0.0), std::invalid_argument);
}

TEST_CASE("j_of_n") {
  CHECK(j_of_n(LagSchedule::linear(), 0) == 1);
  CHECK(j_of_n(LagSchedule::linear(), 3) == 3);
  CHECK(j_of_n(LagSchedule::log_floor(3.0), 0) == 1);
  for (double c : {0.5, 1.0, 2.0, 3.0}) {
    const auto s = LagSchedule::log_floor(c);
    // brute scan stays below 2^20 levels
    for (std::uint64_t n = 0; n <= static_cast<std::uint64_t>(18.0 * c); ++n) {
      Level j = 1;
      while (s.lag(j + 1) <= n) ++j;
      CHECK(j_of_n(s, n) == j);
    }
  }
  CHECK(j_of_n(LagSchedule::log_floor(3.0), 30) == 1290);  // 2^(31/3) = 1290.16
  CHECK_THROWS_AS((void)j_of_n(LagSchedule::log_floor(0.5), 40), std::overflow_error);
  CHECK(j_of_n(worked_schedule(), 1) == 1);
  CHECK_THROWS_AS((void)j_of_n(worked_schedule(), 2), HorizonError);
}

TEST_CASE("worked binary path") {
  Scanner s(PartitionFamily::binary(), worked_schedule());
  std::vector<ScanEvent> events;
  for (double v : kWorked)
    if (auto ev = s.push(v)) events.push_back(*ev);
  REQUIRE(events.size() == 2);
  CHECK(events[0] == ScanEvent{1, 2, 2});
  CHECK(events[1] == ScanEvent{2, 3, 5});
  CHECK(s.next_k() == 3);
  CHECK(s.zeta_prev() == 5);
  CHECK(brute_forward(kWorked, PartitionFamily::binary(), worked_schedule(), 3) == events);
}

TEST_CASE("scan_next truncates and resumes") {
  Scanner s(PartitionFamily::binary(), worked_schedule());
  std::size_t pos = 0;
  std::size_t limit = 4;
  const SampleSource more = [&]() -> std::optional<double> {
    if (pos >= limit) return std::nullopt;
    return kWorked[pos++];
  };
  auto a = scan_next(s, more);
  REQUIRE(std::holds_alternative<ScanEvent>(a));
  CHECK(std::get<ScanEvent>(a) == ScanEvent{1, 2, 2});
  auto b = scan_next(s, more);
  REQUIRE(std::holds_alternative<Truncated>(b));
  CHECK(std::get<Truncated>(b).k == 2);
  CHECK(std::get<Truncated>(b).samples_consumed == 4);
  limit = kWorked.size();
  auto c = scan_next(s, more);
  REQUIRE(std::holds_alternative<ScanEvent>(c));
  CHECK(std::get<ScanEvent>(c) == ScanEvent{2, 3, 5});
  auto d = scan_next(s, more);
  REQUIRE(std::holds_alternative<Truncated>(d));
  CHECK(std::get<Truncated>(d).k == 3);
  CHECK(std::get<Truncated>(d).samples_consumed == 8);
}

TEST_CASE("constant path recurs immediately") {
  const std::vector<double> zeros(300, 0.0);
  for (const auto& sched : {LagSchedule::linear(), LagSchedule::log_floor(3.0)}) {
    const auto ev = scan_all(zeros, PartitionFamily::example2(), sched, 200);
    REQUIRE(ev.size() == 200);
    for (std::size_t i = 0; i < ev.size(); ++i) {
      CHECK(ev[i].eta == 1);
      CHECK(ev[i].zeta == i + 1);
    }
  }
}

TEST_CASE("scanner agrees with brute force") {
  std::mt19937_64 gen(23);
  const std::vector<PartitionFamily> fams{
      PartitionFamily::binary(),
      PartitionFamily(FiniteAlphabetExact{{0.0, 1.0, 2.0}}),
      PartitionFamily::example2(),
      PartitionFamily(DyadicFinite{0.0, 1.0, Pow2Cells{LinearExponent{0.25, 1.0}}}),
      PartitionFamily(DyadicInfinite{LogLogExponent{1.0}}),
  };
  const std::vector<LagSchedule> scheds{LagSchedule::linear(), LagSchedule::log_floor(1.0),
                                        LagSchedule::log_floor(3.0), LagSchedule(CustomLag{{1, 1, 2, 2, 2, 3, 3, 4}})};
  for (int trial = 0; trial < 300; ++trial) {
    const int kind = trial % 3;
    const auto x = random_path(gen, 1500, kind);
    const auto& fam = kind == 0 ? fams[0] : kind == 1 ? fams[1] : fams[2 + trial % 3];
    const auto& sched = scheds[trial % scheds.size()];
    const Level k_max = sched.horizon().value_or(40);
    const auto fast = scan_all(x, fam, sched, k_max);
    const auto slow = brute_forward(x, fam, sched, k_max);
    REQUIRE(fast == slow);
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].zeta >= i + 1);
      if (i > 0) CHECK(fast[i].zeta == fast[i - 1].zeta + fast[i].eta);
    }
  }
}

TEST_CASE("scanner retains a bounded window") {
  std::mt19937_64 gen(29);
  const auto x = random_path(gen, 200000, 0);
  Scanner s(PartitionFamily::binary(), LagSchedule::log_floor(1.0));
  std::size_t max_kept = 0;
  for (double v : x) {
    (void)s.push(v);
    max_kept = std::max(max_kept, s.history().size());
    REQUIRE(s.history_begin() + s.history().size() == s.samples_seen());
  }
  CHECK(max_kept <= s.next_k() + 1 + 8192);
}

TEST_CASE("reverse scan examples") {
  const std::vector<double> zeros(40, 0.0);
  const auto r = reverse_scan(zeros, PartitionFamily::binary(), LagSchedule::linear(), 10);
  REQUIRE(r.steps.size() == 10);
  CHECK_FALSE(r.truncated);
  for (std::size_t i = 0; i < r.steps.size(); ++i) CHECK(r.steps[i].zeta == -static_cast<std::int64_t>(i + 1));

  const std::vector<double> suffix(kWorked.begin(), kWorked.begin() + 6);
  const auto w = reverse_scan(suffix, PartitionFamily::binary(), worked_schedule(), 2);
  REQUIRE(w.steps.size() == 2);
  CHECK(w.steps[0].eta == 3);
  CHECK(w.steps[0].zeta == -3);
  CHECK(w.steps[1].zeta == -5);

  CHECK(reverse_scan(suffix, PartitionFamily::binary(), worked_schedule(), 0).steps.empty());

  const auto t = reverse_scan(std::vector<double>{0, 1}, PartitionFamily::binary(), LagSchedule::linear(), 1);
  CHECK(t.truncated);
  CHECK(t.steps.empty());
}

TEST_CASE("shift duality") {
  std::mt19937_64 gen(31);
  const std::vector<LagSchedule> scheds{LagSchedule::linear(), LagSchedule::log_floor(2.0)};
  std::size_t checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const bool binary = trial % 2 == 0;
    const auto x = random_path(gen, 2000, binary ? 0 : 2);
    const auto fam = binary ? PartitionFamily::binary() : PartitionFamily::example2();
    const auto& sched = scheds[(trial / 2) % 2];
    const auto events = scan_all(x, fam, sched, 1000);
    for (const ScanEvent& ev : events) {
      const std::vector<double> suffix(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(ev.zeta) + 1);
      const auto r = reverse_scan(suffix, fam, sched, ev.k);
      REQUIRE_FALSE(r.truncated);
      REQUIRE(r.steps.size() == ev.k);
      REQUIRE(r.steps.back().zeta == -static_cast<std::int64_t>(ev.zeta));
      ++checked;
    }
  }
  CHECK(checked > 1000);
}
