#include "fdmr/link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fdmr {

double noise_power(double bandwidth_hz, double density_dbm_hz, double noise_figure_db) {
  if (!(bandwidth_hz > 0)) throw std::invalid_argument("bandwidth must be > 0");
  return dbm_to_watts(density_dbm_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

double cancellation_gain(double cancellation_db) {
  if (std::isinf(cancellation_db)) return 0.0;
  if (!(cancellation_db > 0)) throw std::invalid_argument("cancellation must be > 0 dB");
  return db_to_linear(-cancellation_db);
}

LinkBudget LinkBudget::make(const ChannelModelParams& params, double cancellation_db) {
  LinkBudget b;
  b.gamma = cancellation_gain(cancellation_db);
  b.noise_ue = noise_power(params.bandwidth_hz, params.noise_density_dbm_hz, params.noise_figure_ue_db);
  b.noise_bs = noise_power(params.bandwidth_hz, params.noise_density_dbm_hz, params.noise_figure_bs_db);
  b.bandwidth_hz = params.bandwidth_hz;
  return b;
}

void validate_schedule(const ScheduleDecision& sched, const Topology& topo) {
  if (static_cast<int>(sched.size()) != topo.num_cells()) {
    throw std::invalid_argument("schedule size does not match cell count");
  }
  for (int b = 0; b < topo.num_cells(); ++b) {
    const auto& s = sched[b];
    for (const auto& ue : {s.dl, s.ul}) {
      if (ue && (*ue < 0 || *ue >= topo.num_ues() || topo.ue_cell[*ue] != b)) {
        throw std::invalid_argument("cell " + std::to_string(b) + " schedules a foreign UE");
      }
    }
    if (s.dl && s.ul && *s.dl == *s.ul) {
      throw std::invalid_argument("half-duplex UE scheduled in both directions");
    }
  }
}

PowerAllocation max_power_allocation(const ScheduleDecision& sched, const LinkBudget& budget) {
  PowerAllocation p(sched.size());
  for (std::size_t b = 0; b < sched.size(); ++b) {
    p[b].dl = sched[b].dl ? budget.p_max_dl : 0.0;
    p[b].ul = sched[b].ul ? budget.p_max_ul : 0.0;
  }
  return p;
}

double sinr_downlink(int b, const ScheduleDecision& sched, const PowerAllocation& p,
                     const ChannelGains& g, const LinkBudget& budget) {
  const int i = sched.at(b).dl.value();
  double interference = budget.noise_ue;
  const int m = static_cast<int>(sched.size());
  for (int c = 0; c < m; ++c) {
    if (c != b && sched[c].dl) interference += p[c].dl * g.bs_ue(c, i);
    if (sched[c].ul) interference += p[c].ul * g.ue_ue(*sched[c].ul, i);
  }
  return p[b].dl * g.bs_ue(b, i) / interference;
}

double sinr_uplink(int b, const ScheduleDecision& sched, const PowerAllocation& p,
                   const ChannelGains& g, const LinkBudget& budget) {
  const int j = sched.at(b).ul.value();
  double interference = budget.noise_bs;
  if (sched[b].dl) interference += p[b].dl * budget.gamma;
  const int m = static_cast<int>(sched.size());
  for (int c = 0; c < m; ++c) {
    if (c == b) continue;
    if (sched[c].ul) interference += p[c].ul * g.bs_ue(b, *sched[c].ul);
    if (sched[c].dl) interference += p[c].dl * g.bs_bs(c, b);
  }
  return p[b].ul * g.bs_ue(b, j) / interference;
}

double rate(double sinr, const LinkBudget& budget) {
  if (sinr < 0.0) throw std::invalid_argument("negative SINR");
  return std::min(std::log2(1.0 + sinr), budget.rate_cap);
}

std::vector<CellRates> realized_rates(const ScheduleDecision& sched, const PowerAllocation& p,
                                      const ChannelGains& g, const LinkBudget& budget) {
  std::vector<CellRates> out(sched.size());
  for (int b = 0; b < static_cast<int>(sched.size()); ++b) {
    if (sched[b].dl) out[b].dl = rate(sinr_downlink(b, sched, p, g, budget), budget);
    if (sched[b].ul) out[b].ul = rate(sinr_uplink(b, sched, p, g, budget), budget);
  }
  return out;
}

SinrPair intra_cell_sinr(int b, std::optional<int> dl, std::optional<int> ul, CellPower p,
                         const ChannelGains& g, const LinkBudget& budget) {
  SinrPair s;
  const double p_dl = dl ? p.dl : 0.0;
  const double p_ul = ul ? p.ul : 0.0;
  if (dl) {
    const double ue_ue = ul ? p_ul * g.measured(*ul, *dl) : 0.0;
    s.dl = p_dl * g.bs_ue(b, *dl) / (ue_ue + budget.noise_ue);
  }
  if (ul) s.ul = p_ul * g.bs_ue(b, *ul) / (p_dl * budget.gamma + budget.noise_bs);
  return s;
}

}  // namespace fdmr
