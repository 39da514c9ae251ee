#pragma once

#include <vector>

#include "fdmr/common.hpp"
#include "fdmr/link.hpp"

namespace fdmr {

enum class LogBase { Natural, Binary };

/// EWMA average rates per UE and direction, in bits/s/Hz.
class RateTracker {
 public:
  explicit RateTracker(int num_ues, double beta = 0.99, double floor = 1e-3);

  double beta() const { return beta_; }
  double floor() const { return floor_; }
  int num_ues() const { return static_cast<int>(avg_dl_.size()); }

  double average(int ue, Direction dir) const;
  void set_average(int ue, Direction dir, double value);

  /// (1 - beta) / (beta * average).
  double weight(int ue, Direction dir) const;

  /// Blends realized rates into the scheduled UE-directions, decays the rest,
  /// then applies the floor.
  void update(const ScheduleDecision& sched, const std::vector<CellRates>& realized);

  /// Sum of log averages over all UE-directions.
  double log_objective() const;
  /// The decision-independent constant: sum of log(beta * average).
  double decomposition_constant() const;

 private:
  double beta_;
  double floor_;
  std::vector<double> avg_dl_;
  std::vector<double> avg_ul_;
};

/// Marginal utility log(1 + w R); zero when no UE is scheduled.
double chi(double weight, double rate, LogBase base = LogBase::Natural);

double cell_utility(const CellSchedule& s, const CellRates& r, const RateTracker& tracker,
                    LogBase base = LogBase::Natural);

double network_objective(const ScheduleDecision& sched, const std::vector<CellRates>& rates,
                         const RateTracker& tracker, LogBase base = LogBase::Natural);

}  // namespace fdmr
