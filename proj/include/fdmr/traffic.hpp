#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fdmr/dfdmr.hpp"

namespace fdmr {

enum class TrafficKind { FullBuffer, Ftp };

struct TrafficConfig {
  TrafficKind kind = TrafficKind::FullBuffer;
  double file_bits = 1e7;     // 1.25 MB
  double mean_gap_s = 1.0;    // exponential think time between files
  double slot_s = 1e-3;
};

/// Exponential think time with the given mean, in seconds.
double exponential_gap(std::mt19937_64& rng, double mean_s);

/// One file process per UE and direction. A new request is drawn only after
/// the previous file completes.
class TrafficModel {
 public:
  TrafficModel(int num_ues, const TrafficConfig& cfg, std::uint64_t seed);

  const TrafficConfig& config() const { return cfg_; }
  std::int64_t slot() const { return slot_; }
  double now() const { return static_cast<double>(slot_) * cfg_.slot_s; }

  /// UEs with data pending in each direction. Empty (all allowed) for full
  /// buffer.
  Eligibility eligibility() const;

  /// Serves one slot at the given rates (bits/s/Hz) and advances the clock.
  /// Returns the delivered spectral efficiency per link, which is lower than
  /// the offered rate when a file finishes mid-slot.
  std::vector<CellRates> step(const ScheduleDecision& sched, const std::vector<CellRates>& rates,
                              double bandwidth_hz);

  double pending_bits(int ue, Direction d) const { return flow(ue, d).pending; }
  double served_bits(int ue, Direction d) const { return flow(ue, d).served; }
  const std::vector<double>& delays(int ue, Direction d) const { return flow(ue, d).delays; }

 private:
  struct Flow {
    double pending = 0.0;
    double request_time = 0.0;
    double next_arrival = 0.0;
    double served = 0.0;
    std::vector<double> delays;
    std::mt19937_64 rng;
  };
  Flow& flow(int ue, Direction d) { return d == Direction::Downlink ? dl_[ue] : ul_[ue]; }
  const Flow& flow(int ue, Direction d) const { return d == Direction::Downlink ? dl_[ue] : ul_[ue]; }
  double draw_gap(Flow& f);
  void admit_arrivals();
  double serve(Flow& f, double offered_bits, double end_time);

  TrafficConfig cfg_;
  std::int64_t slot_ = 0;
  std::vector<Flow> dl_;
  std::vector<Flow> ul_;
};

}  // namespace fdmr
