#include "fdmr/traffic.hpp"

#include <algorithm>
#include <stdexcept>

namespace fdmr {

TrafficModel::TrafficModel(int num_ues, const TrafficConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), dl_(num_ues), ul_(num_ues) {
  if (!(cfg.slot_s > 0.0)) throw std::invalid_argument("slot duration must be > 0");
  if (!(cfg.file_bits > 0.0 && cfg.mean_gap_s > 0.0)) throw std::invalid_argument("bad FTP parameters");
  for (int u = 0; u < num_ues; ++u) {
    dl_[u].rng.seed(derive_seed(seed, u, 0));
    ul_[u].rng.seed(derive_seed(seed, u, 1));
    if (cfg_.kind == TrafficKind::Ftp) {
      dl_[u].next_arrival = draw_gap(dl_[u]);
      ul_[u].next_arrival = draw_gap(ul_[u]);
    }
  }
  admit_arrivals();
}

double exponential_gap(std::mt19937_64& rng, double mean_s) {
  return std::exponential_distribution<double>(1.0 / mean_s)(rng);
}

double TrafficModel::draw_gap(Flow& f) { return exponential_gap(f.rng, cfg_.mean_gap_s); }

void TrafficModel::admit_arrivals() {
  if (cfg_.kind != TrafficKind::Ftp) return;
  const double t = now();
  for (auto* flows : {&dl_, &ul_}) {
    for (auto& f : *flows) {
      if (f.pending == 0.0 && f.next_arrival <= t) {
        f.pending = cfg_.file_bits;
        f.request_time = f.next_arrival;
      }
    }
  }
}

Eligibility TrafficModel::eligibility() const {
  Eligibility e;
  if (cfg_.kind == TrafficKind::FullBuffer) return e;
  e.dl.resize(dl_.size());
  e.ul.resize(ul_.size());
  for (std::size_t u = 0; u < dl_.size(); ++u) {
    e.dl[u] = dl_[u].pending > 0.0;
    e.ul[u] = ul_[u].pending > 0.0;
  }
  return e;
}

double TrafficModel::serve(Flow& f, double offered_bits, double end_time) {
  if (cfg_.kind == TrafficKind::FullBuffer) {
    f.served += offered_bits;
    return offered_bits;
  }
  const double bits = std::min(offered_bits, f.pending);
  f.served += bits;
  f.pending -= bits;
  if (f.pending <= 0.0 && bits > 0.0) {
    f.pending = 0.0;
    f.delays.push_back(end_time - f.request_time);
    f.next_arrival = end_time + draw_gap(f);
  }
  return bits;
}

std::vector<CellRates> TrafficModel::step(const ScheduleDecision& sched,
                                          const std::vector<CellRates>& rates,
                                          double bandwidth_hz) {
  if (sched.size() != rates.size()) throw std::invalid_argument("schedule/rates size mismatch");
  std::vector<CellRates> delivered(sched.size());
  const double end_time = now() + cfg_.slot_s;
  const double scale = bandwidth_hz * cfg_.slot_s;
  // An untruncated slot reports the offered rate itself, not bits / scale.
  auto deliver = [&](Flow& f, double r) {
    const double offered = r * scale;
    const double bits = serve(f, offered, end_time);
    return bits == offered ? r : bits / scale;
  };
  for (std::size_t b = 0; b < sched.size(); ++b) {
    if (sched[b].dl) delivered[b].dl = deliver(dl_[*sched[b].dl], rates[b].dl);
    if (sched[b].ul) delivered[b].ul = deliver(ul_[*sched[b].ul], rates[b].ul);
  }
  ++slot_;
  admit_arrivals();
  return delivered;
}

}  // namespace fdmr
