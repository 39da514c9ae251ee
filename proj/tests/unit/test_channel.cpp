#include <doctest.h>

#include <cmath>
#include <set>

#include "fdmr/channel.hpp"
#include "fdmr/topology.hpp"

using namespace fdmr;

TEST_CASE("indoor topology shape") {
  const Topology t = generate_indoor_topology(3, 8);
  CHECK(t.num_cells() == 9);
  CHECK(t.num_ues() == 72);
  CHECK(t.wrap.has_value());
  for (int u = 0; u < t.num_ues(); ++u) {
    CHECK(t.nearest_bs(u) == t.ue_cell[u]);
    CHECK(t.ue_index(t.ue_id(u)) == u);
  }
  std::set<NodeId> ids;
  for (int u = 0; u < t.num_ues(); ++u) ids.insert(t.ue_id(u));
  for (int c = 0; c < t.num_cells(); ++c) ids.insert(t.bs_id(c));
  CHECK(ids.size() == 81u);
}

TEST_CASE("one UE per room attaches to its own room") {
  const Topology t = generate_indoor_topology(11, 1);
  REQUIRE(t.num_ues() == 9);
  for (int u = 0; u < 9; ++u) {
    CHECK(t.ue_cell[u] == u);
    CHECK(t.nearest_bs(u) == u);
    CHECK(std::abs(t.ue[u].x - t.bs[u].x) <= 20.0);
    CHECK(std::abs(t.ue[u].y - t.bs[u].y) <= 20.0);
  }
}

TEST_CASE("topology is a function of the seed") {
  const Topology a = generate_outdoor_topology(5, 10);
  const Topology b = generate_outdoor_topology(5, 10);
  const Topology c = generate_outdoor_topology(6, 10);
  REQUIRE(a.num_ues() == b.num_ues());
  bool differs = false;
  for (int u = 0; u < a.num_ues(); ++u) {
    CHECK(a.ue[u].x == b.ue[u].x);
    CHECK(a.ue[u].y == b.ue[u].y);
    differs = differs || a.ue[u].x != c.ue[u].x;
  }
  CHECK(differs);
}

TEST_CASE("outdoor topology spacing") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Topology t;
    try {
      t = generate_outdoor_topology(s, 10);
    } catch (const PlacementError&) {
      continue;
    }
    CHECK(t.num_cells() == 12);
    CHECK(t.num_ues() == 120);
    CHECK_FALSE(t.wrap.has_value());
    for (int a = 0; a < 12; ++a)
      for (int b = a + 1; b < 12; ++b) CHECK(t.distance(t.bs[a], t.bs[b]) >= 40.0);
    for (int u = 0; u < t.num_ues(); ++u) CHECK(t.nearest_bs(u) == t.ue_cell[u]);
  }
}

TEST_CASE("topology json round trip") {
  const Topology t = generate_indoor_topology(2, 3);
  const Topology r = topology_from_json(to_json(t));
  CHECK(r.num_ues() == t.num_ues());
  CHECK(r.ue_cell == t.ue_cell);
  CHECK(r.wrap.has_value());
  for (int u = 0; u < t.num_ues(); ++u) CHECK(r.ue[u].x == t.ue[u].x);
}

TEST_CASE("indoor LOS probability") {
  CHECK(los_probability_indoor(0.018) == 1.0);
  CHECK(los_probability_indoor(0.037) == 0.5);
  CHECK(los_transition_indoor(0.027 + 0.018) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(los_probability_indoor(0.045) == 0.5);
  CHECK(los_probability_indoor(0.03) == doctest::Approx(std::exp(-0.012 / 0.027)));
}

TEST_CASE("outdoor LOS probability") {
  CHECK(los_probability_outdoor(1e-9) == doctest::Approx(1.0));
  CHECK(los_probability_outdoor(1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("LOS probabilities stay in [0, 1]") {
  for (double r = 1e-4; r <= 10.0; r *= 1.05) {
    for (double p : {los_probability_indoor(r), los_probability_outdoor(r)}) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
}

TEST_CASE("path loss examples") {
  CHECK(path_loss_db(LinkClass::IndoorIntra, 0.01, true) == doctest::Approx(55.7));
  CHECK(path_loss_db(LinkClass::OutdoorUeUe, 0.05, false) ==
        doctest::Approx(98.45 + 20.0 * std::log10(0.05)));
  CHECK(path_loss_db(LinkClass::IndoorInter, 0.1, false) == doctest::Approx(104.1));
  CHECK_THROWS_AS(path_loss_db(LinkClass::IndoorIntra, 0.0, true), std::invalid_argument);
}

TEST_CASE("degenerate draws give the bare path loss") {
  const Topology t = generate_indoor_topology(9, 2);
  ChannelModelParams p = ChannelModelParams::indoor();
  p.sigma_los_db = p.sigma_nlos_db = 0.0;
  p.los = LosMode::AlwaysLos;
  const ChannelGains g = compute_channel_gains(t, p, 4);
  for (int u = 0; u < t.num_ues(); ++u) {
    const int c = t.ue_cell[u];
    const double r = std::max(t.bs_ue_distance(c, u), p.min_distance_m) / 1000.0;
    CHECK(g.bs_ue(c, u) == doctest::Approx(db_to_linear(-path_loss_db(LinkClass::IndoorIntra, r, true))).epsilon(1e-12));
    const int o = (c + 1) % t.num_cells();
    const double ro = std::max(t.bs_ue_distance(o, u), p.min_distance_m) / 1000.0;
    const double wall_db = path_loss_db(LinkClass::IndoorInter, ro, true) + 20.0;
    CHECK(g.bs_ue(o, u) == doctest::Approx(db_to_linear(-wall_db)).epsilon(1e-12));
  }
}

TEST_CASE("gains are finite, positive and reciprocal") {
  for (Scenario sc : {Scenario::IndoorRrh, Scenario::OutdoorPico}) {
    const bool indoor = sc == Scenario::IndoorRrh;
    const Topology t = indoor ? generate_indoor_topology(1, 8) : generate_outdoor_topology(1, 10);
    ChannelGains g = compute_channel_gains(
        t, indoor ? ChannelModelParams::indoor() : ChannelModelParams::outdoor(), 17);
    compute_strong_interferers(g, t);
    CHECK(g.bs_ue.allFinite());
    CHECK((g.bs_ue.array() > 0.0).all());
    CHECK(g.ue_ue.isApprox(g.ue_ue.transpose(), 0.0));
    CHECK(g.bs_bs.isApprox(g.bs_bs.transpose(), 0.0));
    CHECK(g.ue_ue.diagonal().isZero());
    for (int i = 0; i < g.num_ues(); ++i)
      for (int j = 0; j < g.num_ues(); ++j) {
        if (i != j) CHECK(g.ue_ue(i, j) > 0.0);
        if (g.measured(i, j) > 0.0) CHECK(g.measured(i, j) == g.ue_ue(i, j));
      }
    for (int c = 0; c < g.num_cells(); ++c)
      for (int u = 0; u < g.num_ues(); u += 7) {
        const double x = g.bs_ue(c, u);
        CHECK(std::abs(db_to_linear(linear_to_db(x)) - x) <= 1e-9 * x);
      }
  }
}

TEST_CASE("serial and parallel gains agree bit for bit") {
  const Topology t = generate_indoor_topology(8, 8);
  const auto p = ChannelModelParams::indoor();
  const ChannelGains a = compute_channel_gains(t, p, 99, ExecPolicy::Serial);
  const ChannelGains b = compute_channel_gains(t, p, 99, ExecPolicy::Parallel);
  CHECK(a.bs_ue == b.bs_ue);
  CHECK(a.ue_ue == b.ue_ue);
  CHECK(a.bs_bs == b.bs_bs);
}

TEST_CASE("indoor wrap-around is translation invariant") {
  const Topology t = generate_indoor_topology(21, 8);
  Topology shifted = t;
  const Vec2 period = *t.wrap;
  for (auto& v : shifted.bs) v.x += period.x;
  for (auto& v : shifted.ue) {
    v.x += period.x;
    v.y -= period.y;
  }
  for (int a = 0; a < t.num_ues(); ++a)
    for (int b = 0; b < t.num_ues(); ++b)
      CHECK(shifted.distance(shifted.ue[a], shifted.ue[b]) ==
            doctest::Approx(t.distance(t.ue[a], t.ue[b])).epsilon(1e-12));
  const auto p = ChannelModelParams::indoor();
  const ChannelGains ga = compute_channel_gains(t, p, 3);
  const ChannelGains gb = compute_channel_gains(shifted, p, 3);
  CHECK(ga.bs_ue.isApprox(gb.bs_ue, 1e-9));
  CHECK(ga.ue_ue.isApprox(gb.ue_ue, 1e-9));
}

TEST_CASE("strong interferer lists") {
  SUBCASE("indoor lists hold every roommate") {
    double sum = 0.0;
    const int drops = 10;
    for (int d = 0; d < drops; ++d) {
      const Topology t = generate_indoor_topology(100 + d, 8);
      ChannelGains g = compute_channel_gains(t, ChannelModelParams::indoor(), 200 + d);
      sum += compute_strong_interferers(g, t).mean;
      int roommates = 0, listed = 0;
      for (int u = 0; u < t.num_ues(); ++u)
        for (int j : t.cells[t.ue_cell[u]]) {
          if (j == u) continue;
          ++roommates;
          listed += g.measured(j, u) > 0.0;
        }
      CHECK(listed >= 0.98 * roommates);
    }
    // Cross-wall neighbours also clear the threshold, so K sits well above 7.
    const double k = sum / drops;
    CHECK(k >= 7.0);
    CHECK(k <= 30.0);
  }
  SUBCASE("outdoor mean K") {
    double sum = 0.0;
    for (int d = 0; d < 5; ++d) {
      const Topology t = generate_outdoor_topology(100 + d, 10);
      ChannelGains g = compute_channel_gains(t, ChannelModelParams::outdoor(), 200 + d);
      sum += compute_strong_interferers(g, t).mean;
    }
    CHECK(sum / 5 == doctest::Approx(8.0).epsilon(0.3));
  }
  SUBCASE("+60 dB UE-to-UE gains put everyone on every list") {
    const Topology t = generate_indoor_topology(4, 8);
    ChannelGains g = compute_channel_gains(t, ChannelModelParams::indoor(), 5);
    g.ue_ue *= 1e6;
    const auto st = compute_strong_interferers(g, t);
    for (int k : st.list_size) CHECK(k == t.num_ues() - 1);
  }
  SUBCASE("isolated UE has an empty list") {
    const Topology t = generate_indoor_topology(4, 8);
    ChannelGains g = compute_channel_gains(t, ChannelModelParams::indoor(), 5);
    g.ue_ue.row(0).setConstant(1e-30);
    g.ue_ue.col(0).setConstant(1e-30);
    g.ue_ue(0, 0) = 0.0;
    compute_strong_interferers(g, t);
    CHECK(g.interferers_of(0).empty());
  }
}

TEST_CASE("block fading") {
  const Topology t = generate_indoor_topology(4, 4);
  ChannelGains g = compute_channel_gains(t, ChannelModelParams::indoor(), 5);
  compute_strong_interferers(g, t);
  const ChannelGains f0 = apply_block_fading(g, 1, 0);
  const ChannelGains f0b = apply_block_fading(g, 1, 0);
  const ChannelGains f1 = apply_block_fading(g, 1, 1);
  CHECK(f0.bs_ue == f0b.bs_ue);
  CHECK_FALSE(f0.bs_ue == f1.bs_ue);
  CHECK(f0.ue_ue.isApprox(f0.ue_ue.transpose(), 0.0));
  for (int i = 0; i < g.num_ues(); ++i)
    for (int j = 0; j < g.num_ues(); ++j) CHECK((f0.measured(i, j) > 0.0) == (g.measured(i, j) > 0.0));
}

TEST_CASE("gains json round trip") {
  const Topology t = generate_indoor_topology(4, 2);
  ChannelGains g = compute_channel_gains(t, ChannelModelParams::indoor(), 5);
  compute_strong_interferers(g, t);
  const ChannelGains r = gains_from_json(to_json(g));
  CHECK(r.bs_ue == g.bs_ue);
  CHECK(r.measured == g.measured);
}
