#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fdmr/common.hpp"
#include "fdmr/topology.hpp"

namespace fdmr {

enum class LinkClass { IndoorIntra, IndoorInter, OutdoorBsUe, OutdoorBsBs, OutdoorUeUe };
enum class LosMode { Random, AlwaysLos, NeverLos };
enum class Fading { None, RayleighBlock };

/// LOS probability for RRH/hotzone links, r in km.
double los_probability_indoor(double r_km);
/// The exponential transition expression of the indoor LOS model, valid on
/// 0.018 < r < 0.037 km. Exposed so the branch can be checked in isolation.
double los_transition_indoor(double r_km);
/// LOS probability for outdoor pico links, r in km, clamped to [0, 1].
double los_probability_outdoor(double r_km);

/// Path loss in dB for the given link class. r_km must be positive.
double path_loss_db(LinkClass cls, double r_km, bool los);

struct ChannelModelParams {
  double sigma_los_db = 3.0;
  double sigma_nlos_db = 4.0;
  double sigma_bs_bs_db = 6.0;      // outdoor only
  double sigma_ue_ue_outdoor_db = 4.0;
  double penetration_db = 20.0;     // indoor inter-room links
  double min_distance_m = 1.0;
  LosMode los = LosMode::Random;
  Fading fading = Fading::None;
  double bandwidth_hz = 10e6;
  double noise_density_dbm_hz = -174.0;
  double noise_figure_bs_db = 8.0;
  double noise_figure_ue_db = 9.0;

  static ChannelModelParams indoor();
  static ChannelModelParams outdoor();
  void validate() const;
};

/// Dense linear power gains for one drop. All matrices are symmetric in the
/// sense of TDD reciprocity; diagonal entries of the square blocks are 0.
struct ChannelGains {
  Eigen::MatrixXd bs_ue;     // [cell][ue]
  Eigen::MatrixXd bs_bs;     // [cell][cell]
  Eigen::MatrixXd ue_ue;     // [ue][ue]
  /// measured(j, i): gain from UE j as reported by UE i, 0 when UE i did not
  /// list j as a strong interferer.
  Eigen::MatrixXd measured;

  int num_cells() const { return static_cast<int>(bs_ue.rows()); }
  int num_ues() const { return static_cast<int>(bs_ue.cols()); }
  /// Strong-interferer list of UE i, ascending.
  std::vector<int> interferers_of(int i) const;
};

struct InterfererStats {
  std::vector<int> list_size;     // per UE
  std::vector<double> cell_mean;  // mean list size per cell
  double mean = 0.0;              // K
};

/// Path loss, shadowing, LOS draws and penetration for every node pair.
/// Random draws are keyed by (seed, link) so both policies agree bit for bit.
ChannelGains compute_channel_gains(const Topology& topo, const ChannelModelParams& params,
                                   std::uint64_t seed, ExecPolicy policy = ExecPolicy::Serial);

/// Fills `gains.measured` by thresholding each UE's UE-to-UE gains against the
/// mean gain from its non-serving base stations.
InterfererStats compute_strong_interferers(ChannelGains& gains, const Topology& topo);

/// Unit-mean exponential per-link power fading for one slot, reciprocal.
/// The measured lists are kept; their values follow the faded gains.
ChannelGains apply_block_fading(const ChannelGains& base, std::uint64_t seed, std::int64_t slot);

nlohmann::json to_json(const ChannelGains& gains);
ChannelGains gains_from_json(const nlohmann::json& j);

}  // namespace fdmr
