#include "fdmr/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fdmr {

// --- names --------------------------------------------------------------------

const char* to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::Dfdmr: return "DFDMR";
    case SchedulerKind::Cfdmr: return "CFDMR";
    case SchedulerKind::HdSync: return "HDSync";
    case SchedulerKind::DynTdd: return "DynTDD";
    case SchedulerKind::RrHd: return "RR-HD";
    case SchedulerKind::RrFd: return "RR-FD";
  }
  return "?";
}

bool is_full_duplex(SchedulerKind k) {
  return k == SchedulerKind::Dfdmr || k == SchedulerKind::Cfdmr || k == SchedulerKind::RrFd;
}

const char* to_string(Scenario s) { return s == Scenario::IndoorRrh ? "indoor" : "outdoor"; }

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
  const auto s = lower(v);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

}  // namespace

SchedulerKind parse_scheduler(const std::string& s) {
  const auto v = lower(s);
  if (v == "dfdmr") return SchedulerKind::Dfdmr;
  if (v == "cfdmr") return SchedulerKind::Cfdmr;
  if (v == "hdsync" || v == "hd") return SchedulerKind::HdSync;
  if (v == "dyntdd") return SchedulerKind::DynTdd;
  if (v == "rr-hd" || v == "rrhd") return SchedulerKind::RrHd;
  if (v == "rr-fd" || v == "rrfd") return SchedulerKind::RrFd;
  throw std::invalid_argument("unknown scheduler: " + s);
}

Scenario parse_scenario(const std::string& s) {
  const auto v = lower(s);
  if (v == "indoor" || v == "indoorrrh") return Scenario::IndoorRrh;
  if (v == "outdoor" || v == "outdoorpico") return Scenario::OutdoorPico;
  throw std::invalid_argument("unknown scenario: " + s);
}

TrafficKind parse_traffic(const std::string& s) {
  const auto v = lower(s);
  if (v == "full" || v == "fullbuffer" || v == "full-buffer") return TrafficKind::FullBuffer;
  if (v == "ftp") return TrafficKind::Ftp;
  throw std::invalid_argument("unknown traffic model: " + s);
}

double parse_cancellation(const std::string& s) {
  const auto v = lower(trim(s));
  if (v == "inf" || v == "infinity") return kInf;
  std::size_t used = 0;
  const double db = std::stod(v, &used);
  if (used != v.size() || !(db > 0.0)) throw std::invalid_argument("bad cancellation: " + s);
  return db;
}

std::string cancellation_label(double db) {
  if (std::isinf(db)) return "inf";
  std::ostringstream os;
  os << db;
  return os.str();
}

// --- config -------------------------------------------------------------------

int ScenarioConfig::effective_ues_per_cell() const {
  if (ues_per_cell > 0) return ues_per_cell;
  return scenario == Scenario::IndoorRrh ? 8 : 10;
}

std::string ScenarioConfig::label() const {
  std::string s = std::string(to_string(scenario)) + "/" + to_string(scheduler);
  if (is_full_duplex(scheduler)) s += "/FD@" + cancellation_label(cancellation_db);
  if (traffic.kind == TrafficKind::Ftp) s += "/ftp";
  return s;
}

void ScenarioConfig::validate() const {
  if (slots < 1) throw std::invalid_argument("slots must be >= 1");
  if (drops < 1) throw std::invalid_argument("drops must be >= 1");
  if (!(cancellation_db > 0.0)) throw std::invalid_argument("cancellation must be > 0 dB or inf");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in (0, 1)");
  if (ues_per_cell < 0) throw std::invalid_argument("ues_per_cell must be >= 0");
  coordination.solver.validate();
}

void apply_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "scenario") cfg.scenario = parse_scenario(v);
  else if (key == "scheduler") cfg.scheduler = parse_scheduler(v);
  else if (key == "cancellation_db" || key == "cancellation") cfg.cancellation_db = parse_cancellation(v);
  else if (key == "ues_per_cell") cfg.ues_per_cell = std::stoi(v);
  else if (key == "slots") cfg.slots = std::stoi(v);
  else if (key == "drops") cfg.drops = std::stoi(v);
  else if (key == "seed") cfg.seed = std::stoull(v);
  else if (key == "beta") cfg.beta = std::stod(v);
  else if (key == "traffic") cfg.traffic.kind = parse_traffic(v);
  else if (key == "ftp_file_bits") cfg.traffic.file_bits = std::stod(v);
  else if (key == "ftp_mean_gap_s") cfg.traffic.mean_gap_s = std::stod(v);
  else if (key == "slot_s") cfg.traffic.slot_s = std::stod(v);
  else if (key == "fading") cfg.fading = parse_bool(v) ? Fading::RayleighBlock : Fading::None;
  else if (key == "sca_tol_db") cfg.coordination.solver.sca_tol_db = std::stod(v);
  else if (key == "inner_tol") cfg.coordination.solver.inner_tol = std::stod(v);
  else if (key == "max_sca_iters") cfg.coordination.solver.max_sca_iters = std::stoi(v);
  else if (key == "max_inner_iters") cfg.coordination.solver.max_inner_iters = std::stoi(v);
  else if (key == "max_rounds") cfg.coordination.max_rounds = std::stoi(v);
  else if (key == "coord_tol_db") cfg.coordination.tol_db = std::stod(v);
  else if (key == "hd_centralized_power") cfg.hd_centralized_power = parse_bool(v);
  else if (key == "parallel") cfg.policy = parse_bool(v) ? ExecPolicy::Parallel : ExecPolicy::Serial;
  else if (key == "message_log_limit") cfg.message_log_limit = std::stoi(v);
  else if (key == "out" || key == "out_dir") cfg.out_dir = v;
  else throw std::invalid_argument("unknown config key: " + key);
}

void apply_config_text(ScenarioConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

// --- one drop -----------------------------------------------------------------

namespace {

Topology draw_topology(const ScenarioConfig& cfg, std::uint64_t drop_seed, int& attempts) {
  const int n = cfg.effective_ues_per_cell();
  for (attempts = 1;; ++attempts) {
    const std::uint64_t s = derive_seed(drop_seed, 1, attempts - 1);
    try {
      return cfg.scenario == Scenario::IndoorRrh ? generate_indoor_topology(s, n)
                                                 : generate_outdoor_topology(s, n);
    } catch (const PlacementError&) {
      if (attempts >= 16) throw;
    }
  }
}

}  // namespace

DropResult run_drop(const ScenarioConfig& cfg, int drop) {
  cfg.validate();
  const std::uint64_t ds = derive_seed(cfg.seed, static_cast<std::uint64_t>(drop));
  DropResult out;
  out.drop = drop;

  const Topology topo = draw_topology(cfg, ds, out.attempts);
  ChannelModelParams params =
      cfg.scenario == Scenario::IndoorRrh ? ChannelModelParams::indoor() : ChannelModelParams::outdoor();
  params.fading = cfg.fading;
  ChannelGains base = compute_channel_gains(topo, params, derive_seed(ds, 2));
  const InterfererStats stats = compute_strong_interferers(base, topo);
  out.interferer_k = stats.mean;
  out.cell_k = stats.cell_mean;

  const LinkBudget budget = LinkBudget::make(params, cfg.cancellation_db);
  const int M = topo.num_cells();
  const int U = topo.num_ues();
  RateTracker tracker(U, cfg.beta);
  TrafficModel traffic(U, cfg.traffic, derive_seed(ds, 3));
  std::mt19937_64 rr_rng(derive_seed(ds, 4));
  std::mt19937_64 greedy_rng(derive_seed(ds, 5));
  RoundRobin rr(topo);

  CoordinationConfig coord = cfg.coordination;
  coord.policy = ExecPolicy::Serial;

  // Centralized report per BS per TTI: BS-BS gains, own UEs' BS gains and
  // their strong-interferer lists.
  std::vector<int> central_fields(M, 0);
  std::vector<int> central_closed(M, 0);
  for (int b = 0; b < M; ++b) {
    const int n_b = static_cast<int>(topo.cells[b].size());
    int listed = 0;
    for (int u : topo.cells[b]) listed += stats.list_size[u];
    central_fields[b] = M + M * n_b + listed;
    central_closed[b] = centralized_bits_per_tti(M, n_b, 0) +
                        8 * static_cast<int>(std::llround(n_b * stats.cell_mean[b]));
  }

  // The schedulers only see measured UE-to-UE gains; this checks the move
  // away from max power against the true channel.
  auto check_true_objective = [&](const ScheduleDecision& sched, const ChannelGains& g,
                                  const PowerAllocation& p) {
    const double f0 = network_objective(
        sched, realized_rates(sched, max_power_allocation(sched, budget), g, budget), tracker);
    const double f1 = network_objective(sched, realized_rates(sched, p, g, budget), tracker);
    out.true_degraded_slots += f1 < f0 - 1e-6 ? 1 : 0;
  };

  auto coordinate = [&](const ScheduleDecision& sched, const ChannelGains& g, std::int64_t slot) {
    CoordinationConfig c = coord;
    const bool keep = cfg.message_log_limit > 0 && drop == 0 &&
                      static_cast<int>(out.messages.size()) < cfg.message_log_limit;
    c.record_messages = keep;
    CoordinationResult res = run_coordination(sched, g, tracker, budget, c, slot);
    out.rounds.push_back(res.rounds);
    out.solver_calls += res.solver_calls;
    out.nonmonotone_calls += res.nonmonotone_calls;
    out.solver_failures += res.solver_failures;
    out.clamps += res.clamps;
    out.unterminated_slots += res.terminated ? 0 : 1;
    out.degraded_slots += res.objective_final < res.objective_start - 1e-6 ? 1 : 0;
    check_true_objective(sched, g, res.powers);
    ++out.coordinated_slots;
    for (const auto& acc : signaling_accounting(res, sched, g)) {
      out.overhead_mismatches += acc.matches() ? 0 : 1;
      out.bits_init += acc.init_bits;
      out.bits_rounds += acc.round_bits;
    }
    if (keep) {
      for (auto& m : res.log) {
        if (static_cast<int>(out.messages.size()) >= cfg.message_log_limit) break;
        out.messages.push_back(std::move(m));
      }
    }
    return res.powers;
  };
  auto centralize = [&](const ScheduleDecision& sched, const ChannelGains& g) {
    const CentralizedResult res =
        centralized_power_allocate(sched, g, tracker, budget, cfg.coordination.solver);
    ++out.solver_calls;
    out.nonmonotone_calls += res.monotone ? 0 : 1;
    out.fallback_slots += res.fallback ? 1 : 0;
    out.degraded_slots += res.objective_final < res.objective_start - 1e-6 ? 1 : 0;
    check_true_objective(sched, g, res.powers);
    for (int b = 0; b < M; ++b) {
      out.bits_centralized += 8 * central_fields[b];
      out.overhead_mismatches += 8 * central_fields[b] == central_closed[b] ? 0 : 1;
    }
    return res.powers;
  };

  for (std::int64_t t = 0; t < cfg.slots; ++t) {
    ChannelGains faded;
    if (cfg.fading == Fading::RayleighBlock) faded = apply_block_fading(base, derive_seed(ds, 6), t);
    const ChannelGains& g = cfg.fading == Fading::RayleighBlock ? faded : base;
    const Eligibility elig = traffic.eligibility();

    ScheduleDecision sched(M);
    PowerAllocation p;
    switch (cfg.scheduler) {
      case SchedulerKind::Dfdmr:
        for (int b = 0; b < M; ++b) sched[b] = intra_cell_select(b, topo, g, tracker, budget, SelectionMode::FullDuplex, elig).sched;
        p = coordinate(sched, g, t);
        break;
      case SchedulerKind::Cfdmr: {
        const GreedyResult gr = greedy_select(topo, g, tracker, budget, greedy_rng, elig);
        for (const auto& s : gr.steps) out.greedy_negative += s.net_gain < 0.0 ? 1 : 0;
        sched = gr.sched;
        p = centralize(sched, g);
        break;
      }
      case SchedulerKind::HdSync:
      case SchedulerKind::DynTdd:
        sched = cfg.scheduler == SchedulerKind::HdSync
                    ? hd_synchronous_schedule(t, topo, g, tracker, budget, elig)
                    : dynamic_tdd_schedule(topo, g, tracker, budget, elig);
        p = cfg.hd_centralized_power ? centralize(sched, g) : coordinate(sched, g, t);
        break;
      case SchedulerKind::RrHd:
      case SchedulerKind::RrFd:
        sched = rr.schedule(t, cfg.scheduler == SchedulerKind::RrHd ? RoundRobinMode::HalfDuplex
                                                                    : RoundRobinMode::FullDuplex,
                            rr_rng, elig);
        p = max_power_allocation(sched, budget);
        break;
    }

    const auto rates = realized_rates(sched, p, g, budget);
    const auto delivered = traffic.step(sched, rates, budget.bandwidth_hz);
    tracker.update(sched, delivered);
    for (int b = 0; b < M; ++b) {
      const bool dl = sched[b].dl && p[b].dl > 0.0;
      const bool ul = sched[b].ul && p[b].ul > 0.0;
      if (dl && ul) ++out.modes.fd;
      else if (dl || ul) ++out.modes.hd;
      else ++out.modes.none;
    }
  }

  const double seconds = cfg.slots * cfg.traffic.slot_s;
  out.ue_cell = topo.ue_cell;
  for (int u = 0; u < U; ++u) {
    out.served_bits_dl.push_back(traffic.served_bits(u, Direction::Downlink));
    out.served_bits_ul.push_back(traffic.served_bits(u, Direction::Uplink));
    out.mbps_dl.push_back(out.served_bits_dl.back() / seconds / 1e6);
    out.mbps_ul.push_back(out.served_bits_ul.back() / seconds / 1e6);
    out.delays_dl.push_back(traffic.delays(u, Direction::Downlink));
    out.delays_ul.push_back(traffic.delays(u, Direction::Uplink));
  }
  return out;
}

// --- aggregation --------------------------------------------------------------

std::vector<CdfPoint> empirical_cdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out.push_back({samples[i], (i + 1) / n});
  return out;
}

double gain_percent(double fd, double hd) { return (fd / hd - 1.0) * 100.0; }

MetricsReport aggregate(const ScenarioConfig& cfg, const std::vector<DropResult>& drops,
                        int failed_drops) {
  MetricsReport r;
  r.label = cfg.label();
  r.failed_drops = failed_drops;
  std::vector<double> dl, ul;
  ModeCounts modes;
  std::int64_t round_sum = 0, round_n = 0;
  double delay_dl = 0.0, delay_ul = 0.0;
  double k_sum = 0.0;
  for (const auto& d : drops) {
    dl.insert(dl.end(), d.mbps_dl.begin(), d.mbps_dl.end());
    ul.insert(ul.end(), d.mbps_ul.begin(), d.mbps_ul.end());
    modes.fd += d.modes.fd;
    modes.hd += d.modes.hd;
    modes.none += d.modes.none;
    for (int n : d.rounds) {
      ++r.rounds_histogram[n];
      round_sum += n;
      ++round_n;
    }
    for (const auto& v : d.delays_dl) {
      for (double x : v) delay_dl += x;
      r.completions_dl += static_cast<std::int64_t>(v.size());
    }
    for (const auto& v : d.delays_ul) {
      for (double x : v) delay_ul += x;
      r.completions_ul += static_cast<std::int64_t>(v.size());
    }
    k_sum += d.interferer_k;
    r.solver_calls += d.solver_calls;
    r.nonmonotone_calls += d.nonmonotone_calls;
    r.degraded_slots += d.degraded_slots;
    r.true_degraded_slots += d.true_degraded_slots;
    r.overhead_mismatches += d.overhead_mismatches;
  }
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  r.mean_dl_mbps = mean(dl);
  r.mean_ul_mbps = mean(ul);
  r.cdf_dl = empirical_cdf(dl);
  r.cdf_ul = empirical_cdf(ul);
  const double cells = static_cast<double>(modes.fd + modes.hd + modes.none);
  if (cells > 0) {
    r.fd_share = modes.fd / cells;
    r.hd_share = modes.hd / cells;
    r.none_share = modes.none / cells;
  }
  r.mean_rounds = round_n ? static_cast<double>(round_sum) / round_n : 0.0;
  r.mean_delay_dl_s = r.completions_dl ? delay_dl / r.completions_dl : 0.0;
  r.mean_delay_ul_s = r.completions_ul ? delay_ul / r.completions_ul : 0.0;
  r.mean_k = drops.empty() ? 0.0 : k_sum / drops.size();
  return r;
}

CampaignResult run_campaign(const ScenarioConfig& cfg) {
  cfg.validate();
  std::vector<std::optional<DropResult>> slots(cfg.drops);
  const bool parallel = cfg.policy == ExecPolicy::Parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int d = 0; d < cfg.drops; ++d) {
    try {
      slots[d] = run_drop(cfg, d);
    } catch (const std::exception&) {
      slots[d].reset();
    }
  }
  CampaignResult out;
  out.config = cfg;
  int failed = 0;
  for (auto& s : slots) {
    if (s) out.drops.push_back(std::move(*s));
    else ++failed;
  }
  out.report = aggregate(cfg, out.drops, failed);
  return out;
}

// --- reports ------------------------------------------------------------------

OverheadReport overhead_report(const CampaignResult& run) {
  OverheadReport r;
  r.num_cells = run.config.scenario == Scenario::IndoorRrh ? 9 : 12;
  r.ues_per_cell = run.config.effective_ues_per_cell();
  r.k = run.report.mean_k;
  r.mean_rounds = run.report.mean_rounds;
  const int k = static_cast<int>(std::lround(r.k));
  r.centralized_bits = centralized_bits_per_tti(r.num_cells, r.ues_per_cell, k);
  r.distributed_bits = distributed_init_bits(r.num_cells, k) +
                       distributed_round_bits(static_cast<int>(std::lround(r.mean_rounds)));
  r.ue_measurement_kbps = ue_measurement_kbps(k, r.ues_per_cell);
  std::int64_t bits = 0, slots = 0;
  for (const auto& d : run.drops) {
    bits += d.bits_init + d.bits_rounds;
    slots += d.coordinated_slots;
    r.mismatches += d.overhead_mismatches;
  }
  r.measured_distributed_bits = slots ? static_cast<double>(bits) / (slots * r.num_cells) : 0.0;
  return r;
}

nlohmann::json to_json(const OverheadReport& r) {
  return {{"num_cells", r.num_cells},
          {"ues_per_cell", r.ues_per_cell},
          {"k", r.k},
          {"mean_rounds", r.mean_rounds},
          {"centralized_bits_per_tti", r.centralized_bits},
          {"distributed_bits_per_tti", r.distributed_bits},
          {"ue_measurement_kbps", r.ue_measurement_kbps},
          {"measured_distributed_bits_per_tti", r.measured_distributed_bits},
          {"mismatches", r.mismatches}};
}

nlohmann::json summary_json(const std::vector<CampaignResult>& runs) {
  auto same_setup = [](const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.scenario == b.scenario && a.seed == b.seed && a.slots == b.slots &&
           a.drops == b.drops && a.traffic.kind == b.traffic.kind;
  };
  nlohmann::json out = nlohmann::json::array();
  for (const auto& run : runs) {
    const auto& r = run.report;
    nlohmann::json j = {{"label", r.label},
                        {"scenario", to_string(run.config.scenario)},
                        {"scheduler", to_string(run.config.scheduler)},
                        {"cancellation_db", cancellation_label(run.config.cancellation_db)},
                        {"traffic", run.config.traffic.kind == TrafficKind::Ftp ? "ftp" : "full"},
                        {"drops", run.drops.size()},
                        {"failed_drops", r.failed_drops},
                        {"slots", run.config.slots},
                        {"mean_dl_mbps", r.mean_dl_mbps},
                        {"mean_ul_mbps", r.mean_ul_mbps},
                        {"mode_share", {{"fd", r.fd_share}, {"hd", r.hd_share}, {"none", r.none_share}}},
                        {"mean_rounds", r.mean_rounds},
                        {"mean_delay_dl_s", r.mean_delay_dl_s},
                        {"mean_delay_ul_s", r.mean_delay_ul_s},
                        {"completions_dl", r.completions_dl},
                        {"completions_ul", r.completions_ul},
                        {"mean_k", r.mean_k},
                        {"solver_calls", r.solver_calls},
                        {"nonmonotone_calls", r.nonmonotone_calls},
                        {"degraded_slots", r.degraded_slots},
                        {"true_degraded_slots", r.true_degraded_slots}};
    for (const auto& ref : runs) {
      if (ref.config.scheduler == SchedulerKind::HdSync && same_setup(ref.config, run.config) &&
          ref.report.mean_dl_mbps > 0 && ref.report.mean_ul_mbps > 0) {
        j["gain_dl_pct"] = gain_percent(r.mean_dl_mbps, ref.report.mean_dl_mbps);
        j["gain_ul_pct"] = gain_percent(r.mean_ul_mbps, ref.report.mean_ul_mbps);
        break;
      }
    }
    out.push_back(std::move(j));
  }
  return {{"runs", out}};
}

void write_outputs(const std::string& dir, const std::vector<CampaignResult>& runs) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    f << std::setprecision(10);
    return f;
  };

  {
    auto f = open("results.csv");
    f << "label,drop,ue_id,cell,dir,mbps,completions,mean_delay_s,delays_s\n";
    for (const auto& run : runs) {
      for (const auto& d : run.drops) {
        for (std::size_t u = 0; u < d.mbps_dl.size(); ++u) {
          for (int dir = 0; dir < 2; ++dir) {
            const auto& delays = dir == 0 ? d.delays_dl[u] : d.delays_ul[u];
            const double mean = delays.empty() ? 0.0
                                               : std::accumulate(delays.begin(), delays.end(), 0.0) / delays.size();
            f << run.report.label << ',' << d.drop << ',' << u << ',' << d.ue_cell[u] << ','
              << (dir == 0 ? "dl" : "ul") << ',' << (dir == 0 ? d.mbps_dl[u] : d.mbps_ul[u]) << ','
              << delays.size() << ',' << mean << ',';
            for (std::size_t k = 0; k < delays.size(); ++k) f << (k ? ";" : "") << delays[k];
            f << '\n';
          }
        }
      }
    }
  }
  for (int dir = 0; dir < 2; ++dir) {
    auto f = open(dir == 0 ? "cdf_dl.csv" : "cdf_ul.csv");
    f << "label,mbps,quantile\n";
    for (const auto& run : runs) {
      for (const auto& p : dir == 0 ? run.report.cdf_dl : run.report.cdf_ul) {
        f << run.report.label << ',' << p.mbps << ',' << p.quantile << '\n';
      }
    }
  }
  {
    auto f = open("convergence.csv");
    f << "label,rounds,count\n";
    for (const auto& run : runs) {
      for (const auto& [n, c] : run.report.rounds_histogram) f << run.report.label << ',' << n << ',' << c << '\n';
    }
  }
  open("summary.json") << summary_json(runs).dump(2) << '\n';
  {
    nlohmann::json o = nlohmann::json::array();
    for (const auto& run : runs) {
      auto j = to_json(overhead_report(run));
      j["label"] = run.report.label;
      o.push_back(std::move(j));
    }
    open("overhead.json") << o.dump(2) << '\n';
  }
  bool any_messages = false;
  for (const auto& run : runs) {
    for (const auto& d : run.drops) any_messages = any_messages || !d.messages.empty();
  }
  if (any_messages) {
    auto f = open("messages.jsonl");
    for (const auto& run : runs) {
      for (const auto& d : run.drops) {
        for (const auto& m : d.messages) {
          auto j = to_json(m);
          j["label"] = run.report.label;
          f << j.dump() << '\n';
        }
      }
    }
  }
}

}  // namespace fdmr
