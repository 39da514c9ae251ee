#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fdmr/dfdmr.hpp"

namespace fdmr {

/// Even slots are downlink everywhere, odd slots uplink.
Direction hd_sync_direction(std::int64_t slot);

ScheduleDecision hd_synchronous_schedule(std::int64_t slot, const Topology& topo,
                                         const ChannelGains& g, const RateTracker& tracker,
                                         const LinkBudget& budget, const Eligibility& elig = {});

/// Per cell, the best single link in either direction (or nothing).
ScheduleDecision dynamic_tdd_schedule(const Topology& topo, const ChannelGains& g,
                                      const RateTracker& tracker, const LinkBudget& budget,
                                      const Eligibility& elig = {});

enum class RoundRobinMode { HalfDuplex, FullDuplex };

/// Cyclic per-cell, per-direction pointers. The FD variant adds a uniformly
/// drawn distinct UE in the opposite direction.
class RoundRobin {
 public:
  explicit RoundRobin(const Topology& topo);

  ScheduleDecision schedule(std::int64_t slot, RoundRobinMode mode, std::mt19937_64& rng,
                            const Eligibility& elig = {});

 private:
  const Topology* topo_;
  std::vector<int> next_dl_;
  std::vector<int> next_ul_;
};

}  // namespace fdmr
