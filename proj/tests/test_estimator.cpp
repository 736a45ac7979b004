#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "intermittent/estimator.hpp"
#include "oracles.hpp"

using namespace intermittent;

namespace {

const std::vector<double> kWorked{0, 1, 0, 0, 1, 0, 1, 1};

std::vector<PredictionEvent> feed(Estimator& e, const std::vector<double>& x, Level k_max = 1u << 30) {
  std::vector<PredictionEvent> out;
  for (double v : x) {
    if (out.size() >= k_max) break;
    if (auto ev = e.push(v)) out.push_back(*ev);
  }
  return out;
}

}  // namespace

TEST_CASE("worked binary path") {
  Estimator e(PartitionFamily::binary(), LagSchedule(CustomLag{{1, 2, 2}}));
  CHECK_FALSE(e.predict_at().has_value());
  const auto ev = feed(e, kWorked);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].k == 1);
  CHECK(ev[0].zeta == 2);
  CHECK(ev[0].g == 1.0);
  CHECK(ev[0].at_time == 2);
  CHECK(ev[1].k == 2);
  CHECK(ev[1].zeta == 5);
  CHECK(ev[1].eta == 3);
  CHECK(ev[1].g == 0.5);
  const auto p = e.predict_at();
  REQUIRE(p.has_value());
  CHECK(p->k == 2);
  CHECK(p->g == 0.5);
}

TEST_CASE("constant path") {
  for (double c : {0.0, 0.37, -4.5}) {
    Estimator e(PartitionFamily::example2(-10.0, 10.0), LagSchedule::log_floor(3.0));
    const auto ev = feed(e, std::vector<double>(500, c), 300);
    REQUIRE(ev.size() == 300);
    for (const auto& x : ev) CHECK(x.g == c);
    CHECK(e.predict_at()->k == 300);
    CHECK(e.predict_at()->g == c);
  }
}

TEST_CASE("out-of-order push") {
  Estimator e(PartitionFamily::binary(), LagSchedule::linear());
  CHECK_NOTHROW((void)e.push(0, 0.0));
  CHECK_NOTHROW((void)e.push(1, 1.0));
  CHECK_THROWS_AS((void)e.push(3, 0.0), std::logic_error);
  CHECK_THROWS_AS((void)e.push(1, 0.0), std::logic_error);
}

TEST_CASE("estimates match the definition on integer paths") {
  std::mt19937_64 gen(41);
  std::uniform_int_distribution<int> sym(0, 4);
  const std::vector<LagSchedule> scheds{LagSchedule::linear(), LagSchedule::log_floor(1.0),
                                        LagSchedule::log_floor(2.0)};
  std::size_t checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(3000);
    const int width = 1 + trial % 5;
    for (auto& v : x) v = static_cast<double>(sym(gen) % width);
    const PartitionFamily fam(FiniteAlphabetExact{{0.0, 1.0, 2.0, 3.0, 4.0}});
    const auto& sched = scheds[trial % scheds.size()];
    Estimator e(fam, sched);
    const auto ev = feed(e, x, 400);
    const auto events = oracle::brute_forward(x, fam, sched, 400);
    REQUIRE(ev.size() == events.size());
    double prev = 0.0;
    double lo = 1e9;
    double hi = -1e9;
    std::int64_t sum = 0;
    std::uint64_t zeta_prev = 0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const double k = static_cast<double>(i + 1);
      const double target = x[zeta_prev + 1];
      sum += static_cast<std::int64_t>(target);
      lo = std::min(lo, target);
      hi = std::max(hi, target);
      CHECK(ev[i].zeta == events[i].zeta);
      // exact on integers: k g_k recovers the integer sum
      CHECK(std::llround(ev[i].g * k) == sum);
      CHECK(std::fabs(ev[i].g - static_cast<double>(sum) / k) <= 1e-15 * std::max(1.0, std::fabs(ev[i].g)));
      // recurrence g_k = ((k - 1) g_{k-1} + x_{zeta_{k-1}+1}) / k
      CHECK(std::fabs(ev[i].g - ((k - 1.0) * prev + target) / k) <= 4e-15 * std::max(1.0, std::fabs(ev[i].g)));
      CHECK(ev[i].g >= lo);
      CHECK(ev[i].g <= hi);
      // causality
      CHECK(ev[i].last_target_index <= ev[i].zeta);
      CHECK(ev[i].last_target_index == zeta_prev + 1);
      prev = ev[i].g;
      zeta_prev = ev[i].zeta;
      ++checked;
    }
  }
  CHECK(checked > 5000);
}

TEST_CASE("real-valued paths against the brute-force average") {
  std::mt19937_64 gen(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = oracle::random_path(gen, 4000, 2);
    const auto fam = PartitionFamily::example2();
    const auto sched = LagSchedule::log_floor(1.0);
    Estimator e(fam, sched);
    const auto ev = feed(e, x, 200);
    const auto events = oracle::brute_forward(x, fam, sched, 200);
    const auto g = oracle::brute_estimates(x, events);
    REQUIRE(ev.size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(ev[i].g == doctest::Approx(g[i]).epsilon(1e-14));
  }
}
