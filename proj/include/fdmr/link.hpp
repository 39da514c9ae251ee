#pragma once

#include <optional>
#include <vector>

#include "fdmr/channel.hpp"
#include "fdmr/topology.hpp"

namespace fdmr {

/// Per-cell (downlink UE, uplink UE) choice. UE ids are global indices.
struct CellSchedule {
  std::optional<int> dl;
  std::optional<int> ul;
  bool operator==(const CellSchedule&) const = default;
  bool idle() const { return !dl && !ul; }
};
using ScheduleDecision = std::vector<CellSchedule>;

/// Transmit powers in watts. `dl` is the BS power, `ul` the UE power.
struct CellPower {
  double dl = 0.0;
  double ul = 0.0;
  bool operator==(const CellPower&) const = default;
};
using PowerAllocation = std::vector<CellPower>;

struct CellRates {
  double dl = 0.0;  // bits/s/Hz
  double ul = 0.0;
};

struct LinkBudget {
  double gamma = 0.0;  // residual self-interference gain, 10^(-x/10)
  double noise_ue = 0.0;
  double noise_bs = 0.0;
  double rate_cap = 6.0;
  double p_max_dl = dbm_to_watts(24.0);
  double p_max_ul = dbm_to_watts(23.0);
  double bandwidth_hz = 10e6;

  /// `cancellation_db` = +inf gives an ideal FD radio.
  static LinkBudget make(const ChannelModelParams& params, double cancellation_db);
};

double noise_power(double bandwidth_hz, double density_dbm_hz, double noise_figure_db);

/// Residual self-interference gain for x dB of cancellation.
double cancellation_gain(double cancellation_db);

/// Throws std::invalid_argument if a cell schedules a foreign UE or the same
/// UE in both directions.
void validate_schedule(const ScheduleDecision& sched, const Topology& topo);

/// Maximum powers on every scheduled link, zero elsewhere.
PowerAllocation max_power_allocation(const ScheduleDecision& sched, const LinkBudget& budget);

/// Network SINR of cell b's downlink UE with all scheduled transmitters.
double sinr_downlink(int b, const ScheduleDecision& sched, const PowerAllocation& p,
                     const ChannelGains& g, const LinkBudget& budget);
/// Network SINR at BS b for its uplink UE, including residual self-interference.
double sinr_uplink(int b, const ScheduleDecision& sched, const PowerAllocation& p,
                   const ChannelGains& g, const LinkBudget& budget);

/// Capped Shannon rate in bits/s/Hz.
double rate(double sinr, const LinkBudget& budget);

/// Realized rates for every cell (0 for absent links).
std::vector<CellRates> realized_rates(const ScheduleDecision& sched, const PowerAllocation& p,
                                      const ChannelGains& g, const LinkBudget& budget);

struct SinrPair {
  double dl = 0.0;
  double ul = 0.0;
};

/// Intra-cell SINRs ignoring inter-cell interference. The UE-to-UE term uses
/// only the measured gain; an unmeasured pair contributes nothing.
SinrPair intra_cell_sinr(int b, std::optional<int> dl, std::optional<int> ul, CellPower p,
                         const ChannelGains& g, const LinkBudget& budget);

}  // namespace fdmr
