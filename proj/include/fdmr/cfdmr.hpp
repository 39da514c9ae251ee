#pragma once

#include <random>
#include <vector>

#include "fdmr/dfdmr.hpp"

namespace fdmr {

struct GreedyStep {
  int cell = 0;
  double net_gain = 0.0;  // own utility minus losses inflicted on decided cells
};

struct GreedyResult {
  ScheduleDecision sched;
  std::vector<int> order;
  std::vector<GreedyStep> steps;
};

/// Sequential selection over a random cell order at maximum powers. Only
/// already-decided cells interfere; UE-to-UE terms use the measured gains.
GreedyResult greedy_select(const Topology& topo, const ChannelGains& g, const RateTracker& tracker,
                           const LinkBudget& budget, std::mt19937_64& rng,
                           const Eligibility& elig = {}, LogBase base = LogBase::Natural);

/// Network-wide power problem over every scheduled link. `var_dl[b]` and
/// `var_ul[b]` give the variable index of each link, -1 when absent.
struct NetworkProblem {
  PowerProblem problem;
  std::vector<int> var_dl;
  std::vector<int> var_ul;
};

NetworkProblem build_network_problem(const ScheduleDecision& sched, const ChannelGains& g,
                                     const RateTracker& tracker, const LinkBudget& budget);

/// Network GP from max power, then per-cell sweeps that re-solve each cell's
/// powers with the rest fixed and keep a move only if the exact objective
/// rises by more than `improve_tol` (relative).
struct CentralizedResult {
  PowerAllocation powers;
  bool fallback = false;  // solver produced nothing usable, max power kept
  bool converged = false;
  bool monotone = true;
  double objective_start = 0.0;  // exact objective at max power
  double objective_final = 0.0;
  int sweeps = 0;  // per-cell refinement passes
};

CentralizedResult centralized_power_allocate(const ScheduleDecision& sched, const ChannelGains& g,
                                             const RateTracker& tracker, const LinkBudget& budget,
                                             const SolverConfig& solver = {},
                                             int max_sweeps = 10, double improve_tol = 1e-4);

}  // namespace fdmr
