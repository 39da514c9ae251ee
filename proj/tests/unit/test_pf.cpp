#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fdmr/dfdmr.hpp"
#include "fdmr/pf.hpp"
#include "instances.hpp"

using namespace fdmr;

TEST_CASE("average update arithmetic") {
  RateTracker t(2, 0.99);
  t.set_average(0, Direction::Downlink, 1.0);
  t.set_average(1, Direction::Downlink, 1.0);
  t.update({{0, std::nullopt}}, {{2.0, 0.0}});
  CHECK(t.average(0, Direction::Downlink) == doctest::Approx(1.01));
  CHECK(t.average(1, Direction::Downlink) == doctest::Approx(0.99));
  CHECK(t.average(0, Direction::Uplink) == t.floor());
}

TEST_CASE("constant rate is the fixed point") {
  RateTracker t(1, 0.99);
  double gap = 3.0 - t.average(0, Direction::Uplink);
  for (int s = 0; s < 2000; ++s) {
    t.update({{std::nullopt, 0}}, {{0.0, 3.0}});
    const double next = 3.0 - t.average(0, Direction::Uplink);
    CHECK(next == doctest::Approx(0.99 * gap).epsilon(1e-9));
    gap = next;
  }
  CHECK(t.average(0, Direction::Uplink) == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("weights") {
  RateTracker t(3, 0.99, 1e-3);
  t.set_average(0, Direction::Downlink, 1.0);
  t.set_average(1, Direction::Downlink, 2.0);
  CHECK(t.weight(0, Direction::Downlink) == doctest::Approx(0.0101010101));
  CHECK(t.weight(1, Direction::Downlink) == doctest::Approx(t.weight(0, Direction::Downlink) / 2));
  const double wmax = 0.01 / (0.99 * 1e-3);
  CHECK(t.weight(2, Direction::Downlink) == doctest::Approx(wmax));
  t.set_average(2, Direction::Downlink, 0.0);
  CHECK(t.average(2, Direction::Downlink) == 1e-3);
  CHECK_THROWS_AS(RateTracker(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RateTracker(1, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("utility increments") {
  CHECK(chi(0.3, 0.0) == 0.0);
  CHECK(chi(0.01, 6.0) == doctest::Approx(std::log(1.06)));
  CHECK(chi(0.01, 6.0, LogBase::Binary) == doctest::Approx(std::log2(1.06)));
  RateTracker t(4);
  t.set_average(0, Direction::Downlink, 0.5);
  t.set_average(1, Direction::Uplink, 2.0);
  const CellRates r{1.5, 4.0};
  CHECK(cell_utility({}, r, t) == 0.0);
  CHECK(cell_utility({0, std::nullopt}, r, t) == doctest::Approx(chi(t.weight(0, Direction::Downlink), 1.5)));
  const double both = std::log1p(0.01 / (0.99 * 0.5) * 1.5) + std::log1p(0.01 / (0.99 * 2.0) * 4.0);
  CHECK(cell_utility({0, 1}, r, t) == doctest::Approx(both));
  CHECK(network_objective({{}, {}}, {r, r}, t) == 0.0);
  CHECK(network_objective({{0, 1}, {}}, {r, r}, t) == doctest::Approx(both));
  CHECK(network_objective({{0, 1}, {2, 3}}, {r, {0.5, 0.25}}, t) ==
        doctest::Approx(both + chi(t.weight(2, Direction::Downlink), 0.5) +
                        chi(t.weight(3, Direction::Uplink), 0.25)));
}

TEST_CASE("log-average objective decomposes per slot") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  RateTracker t(8);
  for (int i = 0; i < 8; ++i) {
    t.set_average(i, Direction::Downlink, 0.5 + u(rng));
    t.set_average(i, Direction::Uplink, 0.5 + u(rng));
  }
  for (int s = 0; s < 200; ++s) {
    ScheduleDecision sched = {{s % 4, (s + 1) % 4}, {4 + s % 4, std::nullopt}};
    std::vector<CellRates> r = {{u(rng), u(rng)}, {u(rng), 0.0}};
    const double predicted = t.decomposition_constant() + network_objective(sched, r, t);
    t.update(sched, r);
    CHECK(t.log_objective() == doctest::Approx(predicted).epsilon(1e-9));
  }
}

TEST_CASE("selection is invariant to the log base") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto net = testing::random_network(s, 2, 6);
    const auto b = testing::default_budget(85);
    RateTracker t(12);
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> u(0.01, 6.0);
    for (int i = 0; i < 12; ++i) {
      t.set_average(i, Direction::Downlink, u(rng));
      t.set_average(i, Direction::Uplink, u(rng));
    }
    for (int c = 0; c < 2; ++c) {
      const auto nat = intra_cell_select(c, net.topo, net.gains, t, b, SelectionMode::FullDuplex, {}, LogBase::Natural);
      const auto bin = intra_cell_select(c, net.topo, net.gains, t, b, SelectionMode::FullDuplex, {}, LogBase::Binary);
      CHECK(nat.sched == bin.sched);
    }
  }
}

TEST_CASE("proportional fairness equalizes symmetric UEs") {
  auto net = testing::random_network(2, 1, 6);
  net.gains.bs_ue.setConstant(db_to_linear(-80));
  net.gains.ue_ue.setConstant(db_to_linear(-140));
  net.gains.ue_ue.diagonal().setZero();
  net.gains.measured = net.gains.ue_ue;
  const auto b = testing::default_budget(kInf);
  RateTracker t(6);
  for (int s = 0; s < 3000; ++s) {
    const auto choice = intra_cell_select(0, net.topo, net.gains, t, b);
    const ScheduleDecision sched = {choice.sched};
    const auto p = max_power_allocation(sched, b);
    t.update(sched, realized_rates(sched, p, net.gains, b));
  }
  for (auto d : {Direction::Downlink, Direction::Uplink}) {
    double lo = kInf, hi = 0.0;
    for (int i = 0; i < 6; ++i) {
      lo = std::min(lo, t.average(i, d));
      hi = std::max(hi, t.average(i, d));
    }
    CHECK(hi <= 1.2 * lo);
  }
}
