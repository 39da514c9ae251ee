#include "fdmr/pf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fdmr {

RateTracker::RateTracker(int num_ues, double beta, double floor)
    : beta_(beta), floor_(floor), avg_dl_(num_ues, floor), avg_ul_(num_ues, floor) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in (0, 1)");
  if (!(floor > 0.0)) throw std::invalid_argument("floor must be > 0");
}

double RateTracker::average(int ue, Direction dir) const {
  return dir == Direction::Downlink ? avg_dl_.at(ue) : avg_ul_.at(ue);
}

void RateTracker::set_average(int ue, Direction dir, double value) {
  auto& slot = dir == Direction::Downlink ? avg_dl_.at(ue) : avg_ul_.at(ue);
  slot = std::max(value, floor_);
}

double RateTracker::weight(int ue, Direction dir) const {
  return (1.0 - beta_) / (beta_ * average(ue, dir));
}

void RateTracker::update(const ScheduleDecision& sched, const std::vector<CellRates>& realized) {
  if (sched.size() != realized.size()) throw std::invalid_argument("rates/schedule size mismatch");
  for (auto& a : avg_dl_) a *= beta_;
  for (auto& a : avg_ul_) a *= beta_;
  for (std::size_t b = 0; b < sched.size(); ++b) {
    if (sched[b].dl) avg_dl_.at(*sched[b].dl) += (1.0 - beta_) * realized[b].dl;
    if (sched[b].ul) avg_ul_.at(*sched[b].ul) += (1.0 - beta_) * realized[b].ul;
  }
  for (auto& a : avg_dl_) a = std::max(a, floor_);
  for (auto& a : avg_ul_) a = std::max(a, floor_);
}

double RateTracker::log_objective() const {
  double s = 0.0;
  for (double a : avg_dl_) s += std::log(a);
  for (double a : avg_ul_) s += std::log(a);
  return s;
}

double RateTracker::decomposition_constant() const {
  double s = 0.0;
  for (double a : avg_dl_) s += std::log(beta_ * a);
  for (double a : avg_ul_) s += std::log(beta_ * a);
  return s;
}

double chi(double weight, double rate, LogBase base) {
  if (rate < 0.0) throw std::invalid_argument("negative rate");
  const double v = std::log1p(weight * rate);
  return base == LogBase::Natural ? v : v / std::numbers::ln2;
}

double cell_utility(const CellSchedule& s, const CellRates& r, const RateTracker& tracker,
                    LogBase base) {
  double phi = 0.0;
  if (s.dl) phi += chi(tracker.weight(*s.dl, Direction::Downlink), r.dl, base);
  if (s.ul) phi += chi(tracker.weight(*s.ul, Direction::Uplink), r.ul, base);
  return phi;
}

double network_objective(const ScheduleDecision& sched, const std::vector<CellRates>& rates,
                         const RateTracker& tracker, LogBase base) {
  double total = 0.0;
  for (std::size_t b = 0; b < sched.size(); ++b) total += cell_utility(sched[b], rates[b], tracker, base);
  return total;
}

}  // namespace fdmr
