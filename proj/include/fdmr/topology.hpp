#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace fdmr {

enum class Scenario { IndoorRrh, OutdoorPico };
enum class NodeKind { Bs, Ue };

struct NodeId {
  NodeKind kind = NodeKind::Ue;
  int cell = 0;
  int local = 0;  // position within the cell's UE list; 0 for base stations
  auto operator<=>(const NodeId&) const = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Node placement for one drop. UEs are indexed globally in cell-major order.
struct Topology {
  Scenario scenario = Scenario::IndoorRrh;
  std::vector<Vec2> bs;
  std::vector<Vec2> ue;
  std::vector<int> ue_cell;
  std::vector<std::vector<int>> cells;
  std::optional<Vec2> wrap;  // torus period for indoor wrap-around

  int num_cells() const { return static_cast<int>(bs.size()); }
  int num_ues() const { return static_cast<int>(ue.size()); }

  /// Euclidean distance in meters, minimum-image when `wrap` is set.
  double distance(Vec2 a, Vec2 b) const;
  double bs_ue_distance(int cell, int u) const { return distance(bs[cell], ue[u]); }

  NodeId ue_id(int u) const;
  NodeId bs_id(int cell) const { return {NodeKind::Bs, cell, 0}; }
  /// Global UE index of the cell's `local`-th UE.
  int ue_index(NodeId id) const;

  /// Index of the nearest base station to a UE (ties to the lowest index).
  int nearest_bs(int u) const;
};

/// Indoor 3x3 grid of square rooms with a BS at each room center.
struct IndoorLayout {
  int grid = 3;
  double room_m = 40.0;
};

/// Sparse outdoor picocells dropped in a hexagonal area.
struct OutdoorLayout {
  int cells = 12;
  double hex_width_m = 500.0;  // vertex-to-vertex
  double min_bs_distance_m = 40.0;
  double cell_radius_m = 40.0;
  int max_attempts = 100000;
};

/// Thrown when rejection sampling exhausts its attempt budget. Callers retry
/// with a fresh seed.
class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Topology generate_indoor_topology(std::uint64_t seed, int ues_per_cell,
                                  const IndoorLayout& layout = {});
Topology generate_outdoor_topology(std::uint64_t seed, int ues_per_cell,
                                   const OutdoorLayout& layout = {});

nlohmann::json to_json(const Topology& topo);
Topology topology_from_json(const nlohmann::json& j);

}  // namespace fdmr
