#include <doctest.h>

#include <cmath>
#include <optional>

#include "fdmr/dfdmr.hpp"
#include "instances.hpp"

using namespace fdmr;

namespace {

// Utility of a (dl, ul) pair in cell b from scratch.
double pair_utility(int b, std::optional<int> dl, std::optional<int> ul, const ChannelGains& g,
                    const RateTracker& t, const LinkBudget& lb) {
  double u = 0.0;
  const double pd = dl ? lb.p_max_dl : 0.0;
  const double pu = ul ? lb.p_max_ul : 0.0;
  if (dl) {
    double den = lb.noise_ue;
    if (ul) den += pu * g.measured(*ul, *dl);
    const double r = std::min(6.0, std::log2(1.0 + pd * g.bs_ue(b, *dl) / den));
    u += std::log(1.0 + (1.0 - t.beta()) / (t.beta() * t.average(*dl, Direction::Downlink)) * r);
  }
  if (ul) {
    const double r = std::min(6.0, std::log2(1.0 + pu * g.bs_ue(b, *ul) / (lb.noise_bs + pd * lb.gamma)));
    u += std::log(1.0 + (1.0 - t.beta()) / (t.beta() * t.average(*ul, Direction::Uplink)) * r);
  }
  return u;
}

// Mirror-image pair of cells: swapping cell 0 with 1 and UE k with k+2 maps
// every gain onto itself.
testing::Network mirrored_pair() {
  auto net = testing::random_network(0, 2, 2);
  auto& g = net.gains;
  const double a = db_to_linear(-75), b = db_to_linear(-82), c = db_to_linear(-105), d = db_to_linear(-110);
  g.bs_ue << a, b, c, d,
             c, d, a, b;
  g.bs_bs << 0, db_to_linear(-100),
             db_to_linear(-100), 0;
  g.ue_ue.setZero();
  auto set = [&](int i, int j, double db) { g.ue_ue(i, j) = g.ue_ue(j, i) = db_to_linear(-db); };
  set(0, 1, 90);
  set(2, 3, 90);
  set(0, 2, 95);
  set(1, 3, 95);
  set(0, 3, 85);
  set(1, 2, 85);
  g.measured = g.ue_ue;
  return net;
}

}  // namespace

TEST_CASE("intra-cell selection matches enumeration of all 81 pairs") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto net = testing::random_network(s, 2, 8);
    const auto t = testing::random_tracker(s, 16);
    const auto lb = testing::default_budget(s % 2 ? 95.0 : kInf);
    for (int b = 0; b < 2; ++b) {
      const auto& ues = net.topo.cells[b];
      std::vector<std::optional<int>> opts = {std::nullopt};
      for (int u : ues) opts.push_back(u);
      double best = 0.0;
      int evaluated = 0;
      for (auto dl : opts)
        for (auto ul : opts) {
          if (dl && ul && *dl == *ul) continue;
          ++evaluated;
          best = std::max(best, pair_utility(b, dl, ul, net.gains, t, lb));
        }
      CHECK(evaluated == 73);  // 81 less the 8 same-UE pairs
      const auto choice = intra_cell_select(b, net.topo, net.gains, t, lb);
      CHECK(choice.utility == doctest::Approx(best).epsilon(1e-12));
      CHECK(pair_utility(b, choice.sched.dl, choice.sched.ul, net.gains, t, lb) ==
            doctest::Approx(choice.utility).epsilon(1e-12));
    }
  }
}

TEST_CASE("intra-cell selection small cases") {
  SUBCASE("single UE picks its better direction") {
    const auto net = testing::random_network(3, 1, 1);
    auto t = testing::random_tracker(3, 1);
    const auto lb = testing::default_budget(95);
    const auto c = intra_cell_select(0, net.topo, net.gains, t, lb);
    const double d = pair_utility(0, 0, std::nullopt, net.gains, t, lb);
    const double u = pair_utility(0, std::nullopt, 0, net.gains, t, lb);
    if (d >= u) CHECK(c.sched == CellSchedule{0, std::nullopt});
    else CHECK(c.sched == CellSchedule{std::nullopt, 0});
  }
  SUBCASE("no penalty means an FD pair") {
    auto net = testing::random_network(4, 1, 2);
    net.gains.measured.setZero();
    const auto t = testing::random_tracker(4, 2);
    const auto c = intra_cell_select(0, net.topo, net.gains, t, testing::default_budget(kInf));
    CHECK(c.sched.dl.has_value());
    CHECK(c.sched.ul.has_value());
  }
  SUBCASE("modes restrict the candidates") {
    const auto net = testing::random_network(5, 1, 4);
    const auto t = testing::random_tracker(5, 4);
    const auto lb = testing::default_budget(95);
    CHECK_FALSE(intra_cell_select(0, net.topo, net.gains, t, lb, SelectionMode::DownlinkOnly).sched.ul);
    CHECK_FALSE(intra_cell_select(0, net.topo, net.gains, t, lb, SelectionMode::UplinkOnly).sched.dl);
    const auto single = intra_cell_select(0, net.topo, net.gains, t, lb, SelectionMode::SingleLink).sched;
    CHECK(single.dl.has_value() != single.ul.has_value());
  }
  SUBCASE("eligibility is honoured") {
    const auto net = testing::random_network(6, 1, 4);
    const auto t = testing::random_tracker(6, 4);
    Eligibility e{{0, 0, 1, 0}, {0, 0, 0, 0}};
    const auto c = intra_cell_select(0, net.topo, net.gains, t, testing::default_budget(95), SelectionMode::FullDuplex, e);
    CHECK(c.sched == CellSchedule{2, std::nullopt});
  }
}

TEST_CASE("init payloads") {
  SUBCASE("single cell carries no cross gains") {
    const auto net = testing::random_network(1, 1, 3);
    const auto inits = init_round({{0, 1}}, net.gains, RateTracker(3));
    CHECK(inits[0].ue_ue.empty());
    CHECK(inits[0].fields() == 6);
  }
  SUBCASE("nine cells with seven strong interferers") {
    auto net = testing::random_network(2, 9, 2);
    ScheduleDecision s(9);
    for (int b = 0; b < 9; ++b) s[b] = {2 * b, 2 * b + 1};
    // UE 0 hears all eight foreign uplink UEs but one.
    net.gains.measured(3, 0) = 0.0;
    const auto inits = init_round(s, net.gains, RateTracker(18));
    CHECK(inits[0].ue_ue.size() == 7u);
    CHECK(8 * inits[0].fields() == 232);
    CHECK(distributed_init_bits(9, 7) == 232);
  }
}

TEST_CASE("interference estimates") {
  const auto net = testing::random_network(8, 2, 2);
  const auto& g = net.gains;
  const auto lb = testing::default_budget(90);
  const ScheduleDecision s = {{0, 1}, {2, 3}};
  const auto inits = init_round(s, g, RateTracker(4));
  const auto a0 = make_agent(0, inits, g, lb);
  SUBCASE("silent neighbours leave noise and self-interference") {
    const PowerAllocation p = {{0.1, 0.2}, {0.0, 0.0}};
    const auto r = estimate_interference(a0, p);
    CHECK(r.dl == doctest::Approx(lb.noise_ue + 0.2 * g.measured(1, 0)));
    CHECK(r.ul == doctest::Approx(lb.noise_bs + 0.1 * lb.gamma));
  }
  SUBCASE("two cells against scalar arithmetic") {
    const PowerAllocation p = {{0.1, 0.2}, {0.05, 0.02}};
    const auto r = estimate_interference(a0, p);
    CHECK(r.dl == doctest::Approx(lb.noise_ue + 0.2 * g.measured(1, 0) + 0.05 * g.bs_ue(1, 0) +
                                  0.02 * g.measured(3, 0)));
    CHECK(r.ul == doctest::Approx(lb.noise_bs + 0.1 * lb.gamma + 0.02 * g.bs_ue(0, 3) +
                                  0.05 * g.bs_bs(1, 0)));
  }
}

TEST_CASE("local problem shape") {
  const auto lb = testing::default_budget(kInf);
  SUBCASE("single cell, ideal cancellation: caps") {
    auto net = testing::random_network(9, 1, 2);
    net.gains.measured.setZero();
    const ScheduleDecision s = {{0, 1}};
    const auto inits = init_round(s, net.gains, RateTracker(2));
    const auto a = make_agent(0, inits, net.gains, lb);
    const PowerAllocation p = max_power_allocation(s, lb);
    const auto lp = build_local_problem(a, p, {estimate_interference(a, p)});
    CHECK(lp.problem.size() == 2);
    for (const auto& t : lp.problem.terms) CHECK(t.coupling.empty());
    const auto up = power_update(a, p, {estimate_interference(a, p)}, SolverConfig{});
    CHECK(up.power.dl == lb.p_max_dl);
    CHECK(up.power.ul == lb.p_max_ul);
  }
  SUBCASE("no uplink UE gives one variable") {
    const auto net = testing::random_network(9, 1, 2);
    const ScheduleDecision s = {{0, std::nullopt}};
    const auto inits = init_round(s, net.gains, RateTracker(2));
    const auto a = make_agent(0, inits, net.gains, lb);
    const PowerAllocation p = max_power_allocation(s, lb);
    const auto lp = build_local_problem(a, p, {estimate_interference(a, p)});
    CHECK(lp.problem.size() == 1);
    CHECK(lp.ul_var == -1);
  }
  SUBCASE("single cell with self-interference matches the grid oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto net = testing::random_network(seed, 1, 2);
      const auto lb95 = testing::default_budget(75);
      const ScheduleDecision s = {{0, 1}};
      const auto t = testing::random_tracker(seed, 2);
      const auto inits = init_round(s, net.gains, t);
      const auto a = make_agent(0, inits, net.gains, lb95);
      const PowerAllocation p = max_power_allocation(s, lb95);
      const auto lp = build_local_problem(a, p, {estimate_interference(a, p)});
      REQUIRE(lp.problem.size() == 2);
      const auto rep = solve_signomial(lp.problem, std::vector<double>{lb95.p_max_dl, lb95.p_max_ul});
      const auto oracle = brute_force_power_oracle(lp.problem);
      CHECK(rep.objective >= oracle.objective * (1.0 - 1e-3));
    }
  }
}

TEST_CASE("strong cross-cell UE-to-UE gain lowers the uplink power") {
  auto net = testing::random_network(10, 2, 2);
  auto& g = net.gains;
  // Cell 0's uplink UE 1 sits next to cell 1's downlink UE 2.
  g.measured(1, 2) = g.ue_ue(1, 2) = g.ue_ue(2, 1) = db_to_linear(-50);
  g.bs_ue(1, 2) = db_to_linear(-70);
  g.measured(1, 0) = 0.0;
  RateTracker t(4);
  t.set_average(1, Direction::Uplink, 5.0);
  t.set_average(2, Direction::Downlink, 0.05);
  t.set_average(0, Direction::Downlink, 1.0);
  t.set_average(3, Direction::Uplink, 1.0);
  const auto lb = testing::default_budget(kInf);

  const ScheduleDecision both = {{0, 1}, {2, 3}};
  const auto inits = init_round(both, g, t);
  const auto a0 = make_agent(0, inits, g, lb);
  const PowerAllocation p = max_power_allocation(both, lb);
  std::vector<InterferenceReport> rep = {estimate_interference(a0, p),
                                         estimate_interference(make_agent(1, inits, g, lb), p)};
  const auto coupled = power_update(a0, p, rep, SolverConfig{});

  const ScheduleDecision alone = {{0, 1}};
  auto solo = testing::random_network(10, 1, 2);
  solo.gains.bs_ue.row(0) = g.bs_ue.row(0).head(2);
  solo.gains.measured(1, 0) = 0.0;
  const auto solo_inits = init_round(alone, solo.gains, t);
  const auto s0 = make_agent(0, solo_inits, solo.gains, lb);
  const PowerAllocation ps = max_power_allocation(alone, lb);
  const auto isolated = power_update(s0, ps, {estimate_interference(s0, ps)}, SolverConfig{});

  CHECK(isolated.power.ul == lb.p_max_ul);
  CHECK(coupled.power.ul < isolated.power.ul);
  CHECK(coupled.power.ul < lb.p_max_ul);
}

TEST_CASE("power updates read only what the BS owns") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto net = testing::random_network(seed, 3, 3);
    const auto t = testing::random_tracker(seed, 9);
    const auto lb = testing::default_budget(95);
    const ScheduleDecision s = {{0, 1}, {3, 5}, {6, 7}};
    const auto inits = init_round(s, net.gains, t);
    const PowerAllocation p = max_power_allocation(s, lb);

    ChannelGains bad = net.gains;
    // Nothing below is in BS 0's own measurements.
    bad.bs_bs(1, 2) = bad.bs_bs(2, 1) = 1.0;
    bad.bs_ue(1, 2) = bad.bs_ue(2, 8) = 1.0;
    bad.ue_ue(4, 8) = bad.ue_ue(8, 4) = 1.0;
    bad.measured(2, 4) = 1.0;
    // True UE-to-UE gains of scheduled pairs are only known through reports.
    bad.ue_ue(5, 0) = bad.ue_ue(0, 5) = 1.0;
    bad.ue_ue(1, 6) = bad.ue_ue(6, 1) = 1.0;

    std::vector<InterferenceReport> rep;
    for (int b = 0; b < 3; ++b) rep.push_back(estimate_interference(make_agent(b, inits, net.gains, lb), p));
    const auto clean = power_update(make_agent(0, inits, net.gains, lb), p, rep, SolverConfig{});
    const auto dirty = power_update(make_agent(0, inits, bad, lb), p, rep, SolverConfig{});
    CHECK(clean.power == dirty.power);
  }
}

TEST_CASE("coordination") {
  const auto lb = testing::default_budget(95);
  SUBCASE("one cell converges in one round") {
    auto net = testing::random_network(11, 1, 3);
    net.gains.measured.setZero();
    const auto res = run_coordination({{0, 1}}, net.gains, testing::random_tracker(1, 3),
                                      testing::default_budget(kInf), {});
    CHECK(res.rounds == 1);
    CHECK(res.terminated);
    CHECK(res.powers[0].dl == lb.p_max_dl);
  }
  SUBCASE("mirrored cells get mirrored powers") {
    const auto net = mirrored_pair();
    RateTracker t(4);
    for (int k : {0, 2}) t.set_average(k, Direction::Downlink, 0.7);
    for (int k : {1, 3}) t.set_average(k, Direction::Uplink, 1.9);
    const auto res = run_coordination({{0, 1}, {2, 3}}, net.gains, t, lb, {});
    CHECK(res.powers[0].dl == doctest::Approx(res.powers[1].dl).epsilon(1e-9));
    CHECK(res.powers[0].ul == doctest::Approx(res.powers[1].ul).epsilon(1e-9));
  }
  SUBCASE("estimated objective never falls below max power") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto net = testing::random_network(s, 4, 3);
      const auto t = testing::random_tracker(s, 12);
      ScheduleDecision sched(4);
      for (int b = 0; b < 4; ++b) sched[b] = intra_cell_select(b, net.topo, net.gains, t, lb).sched;
      const auto res = run_coordination(sched, net.gains, t, lb, {});
      CHECK(res.objective_final >= res.objective_start - 1e-6);
      CHECK(res.rounds >= 1);
      CHECK(res.rounds <= 20);
      for (int b = 0; b < 4; ++b) {
        CHECK(res.powers[b].dl <= lb.p_max_dl);
        CHECK(res.powers[b].ul <= lb.p_max_ul);
        CHECK(res.powers[b].dl >= 0.0);
      }
    }
  }
  SUBCASE("message logs are deterministic and policy independent") {
    const auto net = testing::random_network(12, 5, 3);
    const auto t = testing::random_tracker(12, 15);
    ScheduleDecision sched(5);
    for (int b = 0; b < 5; ++b) sched[b] = intra_cell_select(b, net.topo, net.gains, t, lb).sched;
    CoordinationConfig c;
    c.record_messages = true;
    const auto a = run_coordination(sched, net.gains, t, lb, c, 3);
    const auto b = run_coordination(sched, net.gains, t, lb, c, 3);
    c.policy = ExecPolicy::Parallel;
    const auto p = run_coordination(sched, net.gains, t, lb, c, 3);
    REQUIRE(a.log.size() == b.log.size());
    REQUIRE(a.log.size() == p.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
      CHECK(to_json(a.log[i]) == to_json(b.log[i]));
      CHECK(to_json(a.log[i]) == to_json(p.log[i]));
    }
    CHECK(a.log.size() == 5u + 10u * a.rounds);
  }
}

TEST_CASE("signalling overhead") {
  CHECK(centralized_bits_per_tti(9, 8, 7) == 1096);
  CHECK(distributed_init_bits(9, 7) + distributed_round_bits(7) == 456);
  CHECK(ue_measurement_kbps(7, 8) == 224.0);
  CHECK(ue_measurement_kbps(8, 10) == 320.0);

  const auto net = testing::random_network(13, 4, 3);
  const auto t = testing::random_tracker(13, 12);
  const auto lb = testing::default_budget(85);
  ScheduleDecision sched(4);
  for (int b = 0; b < 4; ++b) sched[b] = intra_cell_select(b, net.topo, net.gains, t, lb).sched;
  CoordinationConfig c;
  c.record_messages = true;
  const auto res = run_coordination(sched, net.gains, t, lb, c);
  const auto acc = signaling_accounting(res, sched, net.gains);
  for (int b = 0; b < 4; ++b) {
    CHECK(acc[b].matches());
    int logged = 0;
    for (const auto& m : res.log)
      if (m.sender == b) logged += m.bits();
    CHECK(logged == acc[b].init_bits + acc[b].round_bits);
  }
}
