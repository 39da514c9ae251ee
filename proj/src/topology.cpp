#include "fdmr/topology.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fdmr/common.hpp"

namespace fdmr {

double Topology::distance(Vec2 a, Vec2 b) const {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  if (wrap) {
    dx -= wrap->x * std::round(dx / wrap->x);
    dy -= wrap->y * std::round(dy / wrap->y);
  }
  return std::hypot(dx, dy);
}

NodeId Topology::ue_id(int u) const {
  const int c = ue_cell.at(u);
  const auto& members = cells[c];
  for (int k = 0; k < static_cast<int>(members.size()); ++k) {
    if (members[k] == u) return {NodeKind::Ue, c, k};
  }
  throw std::logic_error("UE missing from its cell list");
}

int Topology::ue_index(NodeId id) const {
  if (id.kind != NodeKind::Ue) throw std::invalid_argument("ue_index: not a UE id");
  return cells.at(id.cell).at(id.local);
}

int Topology::nearest_bs(int u) const {
  int best = 0;
  double best_d = kInf;
  for (int c = 0; c < num_cells(); ++c) {
    const double d = distance(bs[c], ue[u]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

void finalize_cells(Topology& topo) {
  topo.cells.assign(topo.bs.size(), {});
  for (int u = 0; u < topo.num_ues(); ++u) topo.cells[topo.ue_cell[u]].push_back(u);
}

bool inside_hexagon(Vec2 p, double circumradius) {
  // Pointy-side hexagon centered at the origin with vertices on the x axis.
  const double ax = std::abs(p.x);
  const double ay = std::abs(p.y);
  const double s3 = std::numbers::sqrt3;
  if (ay > circumradius * s3 / 2.0) return false;
  return s3 * ax + ay <= s3 * circumradius;
}

}  // namespace

Topology generate_indoor_topology(std::uint64_t seed, int ues_per_cell, const IndoorLayout& layout) {
  if (ues_per_cell < 1) throw std::invalid_argument("ues_per_cell must be >= 1");
  if (layout.grid < 1 || layout.room_m <= 0.0) throw std::invalid_argument("bad indoor layout");

  Topology topo;
  topo.scenario = Scenario::IndoorRrh;
  const double period = layout.grid * layout.room_m;
  topo.wrap = Vec2{period, period};

  std::mt19937_64 rng(derive_seed(seed, 0x1D00));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int row = 0; row < layout.grid; ++row) {
    for (int col = 0; col < layout.grid; ++col) {
      const double x0 = col * layout.room_m;
      const double y0 = row * layout.room_m;
      const int cell = topo.num_cells();
      topo.bs.push_back({x0 + layout.room_m / 2.0, y0 + layout.room_m / 2.0});
      for (int k = 0; k < ues_per_cell; ++k) {
        topo.ue.push_back({x0 + unit(rng) * layout.room_m, y0 + unit(rng) * layout.room_m});
        topo.ue_cell.push_back(cell);
      }
    }
  }
  finalize_cells(topo);
  return topo;
}

Topology generate_outdoor_topology(std::uint64_t seed, int ues_per_cell, const OutdoorLayout& layout) {
  if (ues_per_cell < 1) throw std::invalid_argument("ues_per_cell must be >= 1");

  Topology topo;
  topo.scenario = Scenario::OutdoorPico;
  std::mt19937_64 rng(derive_seed(seed, 0x0D00));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double radius = layout.hex_width_m / 2.0;
  int attempts = 0;
  while (topo.num_cells() < layout.cells) {
    if (++attempts > layout.max_attempts) throw PlacementError("outdoor BS placement failed");
    const Vec2 p{(2.0 * unit(rng) - 1.0) * radius, (2.0 * unit(rng) - 1.0) * radius};
    if (!inside_hexagon(p, radius)) continue;
    bool ok = true;
    for (const auto& q : topo.bs) ok = ok && topo.distance(p, q) >= layout.min_bs_distance_m;
    if (ok) topo.bs.push_back(p);
  }

  // UEs are uniform in the picocell disc, restricted to points whose nearest
  // BS is their own so that nearest-BS association holds.
  for (int c = 0; c < topo.num_cells(); ++c) {
    for (int k = 0; k < ues_per_cell; ++k) {
      for (int tries = 0;; ++tries) {
        if (tries > layout.max_attempts) throw PlacementError("outdoor UE placement failed");
        const double r = layout.cell_radius_m * std::sqrt(unit(rng));
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        const Vec2 p{topo.bs[c].x + r * std::cos(phi), topo.bs[c].y + r * std::sin(phi)};
        bool own_nearest = true;
        for (int o = 0; o < topo.num_cells() && own_nearest; ++o) {
          if (o != c && topo.distance(p, topo.bs[o]) < r) own_nearest = false;
        }
        if (own_nearest) {
          topo.ue.push_back(p);
          topo.ue_cell.push_back(c);
          break;
        }
      }
    }
  }
  finalize_cells(topo);
  return topo;
}

nlohmann::json to_json(const Topology& topo) {
  auto points = [](const std::vector<Vec2>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : v) arr.push_back({p.x, p.y});
    return arr;
  };
  nlohmann::json j;
  j["scenario"] = topo.scenario == Scenario::IndoorRrh ? "indoor" : "outdoor";
  j["bs_positions_m"] = points(topo.bs);
  j["ue_positions_m"] = points(topo.ue);
  j["ue_cell"] = topo.ue_cell;
  j["wrap_m"] = topo.wrap ? nlohmann::json{topo.wrap->x, topo.wrap->y} : nlohmann::json(nullptr);
  return j;
}

Topology topology_from_json(const nlohmann::json& j) {
  Topology topo;
  topo.scenario = j.at("scenario").get<std::string>() == "indoor" ? Scenario::IndoorRrh
                                                                  : Scenario::OutdoorPico;
  for (const auto& p : j.at("bs_positions_m")) topo.bs.push_back({p.at(0), p.at(1)});
  for (const auto& p : j.at("ue_positions_m")) topo.ue.push_back({p.at(0), p.at(1)});
  topo.ue_cell = j.at("ue_cell").get<std::vector<int>>();
  if (topo.ue_cell.size() != topo.ue.size()) throw std::invalid_argument("ue_cell size mismatch");
  for (int c : topo.ue_cell) {
    if (c < 0 || c >= topo.num_cells()) throw std::invalid_argument("ue_cell out of range");
  }
  if (!j.at("wrap_m").is_null()) topo.wrap = Vec2{j["wrap_m"].at(0), j["wrap_m"].at(1)};
  finalize_cells(topo);
  return topo;
}

}  // namespace fdmr
