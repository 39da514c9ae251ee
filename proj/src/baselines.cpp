#include "fdmr/baselines.hpp"

namespace fdmr {

Direction hd_sync_direction(std::int64_t slot) {
  return slot % 2 == 0 ? Direction::Downlink : Direction::Uplink;
}

ScheduleDecision hd_synchronous_schedule(std::int64_t slot, const Topology& topo,
                                         const ChannelGains& g, const RateTracker& tracker,
                                         const LinkBudget& budget, const Eligibility& elig) {
  const auto mode = hd_sync_direction(slot) == Direction::Downlink ? SelectionMode::DownlinkOnly
                                                                   : SelectionMode::UplinkOnly;
  ScheduleDecision s(topo.num_cells());
  for (int b = 0; b < topo.num_cells(); ++b) {
    s[b] = intra_cell_select(b, topo, g, tracker, budget, mode, elig).sched;
  }
  return s;
}

ScheduleDecision dynamic_tdd_schedule(const Topology& topo, const ChannelGains& g,
                                      const RateTracker& tracker, const LinkBudget& budget,
                                      const Eligibility& elig) {
  ScheduleDecision s(topo.num_cells());
  for (int b = 0; b < topo.num_cells(); ++b) {
    s[b] = intra_cell_select(b, topo, g, tracker, budget, SelectionMode::SingleLink, elig).sched;
  }
  return s;
}

RoundRobin::RoundRobin(const Topology& topo)
    : topo_(&topo), next_dl_(topo.num_cells(), 0), next_ul_(topo.num_cells(), 0) {}

ScheduleDecision RoundRobin::schedule(std::int64_t slot, RoundRobinMode mode,
                                      std::mt19937_64& rng, const Eligibility& elig) {
  const Direction dir = hd_sync_direction(slot);
  const Direction other = dir == Direction::Downlink ? Direction::Uplink : Direction::Downlink;
  ScheduleDecision s(topo_->num_cells());
  for (int b = 0; b < topo_->num_cells(); ++b) {
    const auto& ues = topo_->cells[b];
    const int n = static_cast<int>(ues.size());
    int& ptr = dir == Direction::Downlink ? next_dl_[b] : next_ul_[b];
    std::optional<int> pick;
    for (int step = 0; step < n && !pick; ++step) {
      const int u = ues[(ptr + step) % n];
      if (elig.allows(u, dir)) {
        pick = u;
        ptr = (ptr + step + 1) % n;
      }
    }
    if (!pick) continue;
    std::optional<int> partner;
    if (mode == RoundRobinMode::FullDuplex) {
      std::vector<int> pool;
      for (int u : ues) {
        if (u != *pick && elig.allows(u, other)) pool.push_back(u);
      }
      if (!pool.empty()) {
        partner = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      }
    }
    if (dir == Direction::Downlink) {
      s[b] = {pick, partner};
    } else {
      s[b] = {partner, pick};
    }
  }
  return s;
}

}  // namespace fdmr
