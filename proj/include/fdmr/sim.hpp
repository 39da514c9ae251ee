#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdmr/baselines.hpp"
#include "fdmr/cfdmr.hpp"
#include "fdmr/dfdmr.hpp"
#include "fdmr/traffic.hpp"

namespace fdmr {

enum class SchedulerKind { Dfdmr, Cfdmr, HdSync, DynTdd, RrHd, RrFd };

const char* to_string(SchedulerKind k);
/// False for the HD schedulers, whose results do not depend on cancellation.
bool is_full_duplex(SchedulerKind k);
const char* to_string(Scenario s);
SchedulerKind parse_scheduler(const std::string& s);
Scenario parse_scenario(const std::string& s);
TrafficKind parse_traffic(const std::string& s);
/// "inf" or a positive number of dB.
double parse_cancellation(const std::string& s);
std::string cancellation_label(double db);

struct ScenarioConfig {
  Scenario scenario = Scenario::IndoorRrh;
  SchedulerKind scheduler = SchedulerKind::Dfdmr;
  double cancellation_db = kInf;
  int ues_per_cell = 0;  // 0: 8 indoor, 10 outdoor
  int slots = 1000;
  int drops = 20;
  std::uint64_t seed = 1;
  double beta = 0.99;
  TrafficConfig traffic;
  Fading fading = Fading::None;
  CoordinationConfig coordination;
  /// HD baselines use the distributed power step unless this is set.
  bool hd_centralized_power = false;
  ExecPolicy policy = ExecPolicy::Serial;  // over drops
  /// Messages kept for export, counted from the first slot of drop 0.
  int message_log_limit = 0;
  std::string out_dir = "out";

  int effective_ues_per_cell() const;
  std::string label() const;
  void validate() const;
};

/// Applies `key = value` lines (# comments allowed). Unknown keys throw.
void apply_config_text(ScenarioConfig& cfg, const std::string& text);
void apply_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value);

struct ModeCounts {
  std::int64_t fd = 0;
  std::int64_t hd = 0;
  std::int64_t none = 0;
};

struct DropResult {
  int drop = 0;
  int attempts = 1;  // topology draws needed
  std::vector<int> ue_cell;
  std::vector<double> mbps_dl;  // per UE
  std::vector<double> mbps_ul;
  std::vector<double> served_bits_dl;
  std::vector<double> served_bits_ul;
  std::vector<std::vector<double>> delays_dl;
  std::vector<std::vector<double>> delays_ul;
  ModeCounts modes;
  std::vector<int> rounds;  // coordination rounds per slot (empty if none ran)
  double interferer_k = 0.0;
  std::vector<double> cell_k;
  std::int64_t solver_calls = 0;
  std::int64_t nonmonotone_calls = 0;
  std::int64_t solver_failures = 0;
  std::int64_t clamps = 0;
  std::int64_t unterminated_slots = 0;
  std::int64_t degraded_slots = 0;   // final estimated objective below start
  std::int64_t true_degraded_slots = 0;  // same test with the true gains
  std::int64_t greedy_negative = 0;
  std::int64_t fallback_slots = 0;
  std::int64_t overhead_mismatches = 0;
  std::int64_t bits_init = 0;       // distributed, summed over BSs and slots
  std::int64_t bits_rounds = 0;
  std::int64_t bits_centralized = 0;
  std::int64_t coordinated_slots = 0;
  std::vector<BsMessage> messages;
};

/// One drop. Topology, gains and traffic draws depend only on (seed, drop),
/// so runs with different schedulers see the same channels.
DropResult run_drop(const ScenarioConfig& cfg, int drop);

struct CdfPoint {
  double mbps = 0.0;
  double quantile = 0.0;
};

struct MetricsReport {
  std::string label;
  double mean_dl_mbps = 0.0;
  double mean_ul_mbps = 0.0;
  std::vector<CdfPoint> cdf_dl;
  std::vector<CdfPoint> cdf_ul;
  double fd_share = 0.0;
  double hd_share = 0.0;
  double none_share = 0.0;
  double mean_rounds = 0.0;
  std::map<int, std::int64_t> rounds_histogram;
  double mean_delay_dl_s = 0.0;
  double mean_delay_ul_s = 0.0;
  std::int64_t completions_dl = 0;
  std::int64_t completions_ul = 0;
  double mean_k = 0.0;
  std::int64_t solver_calls = 0;
  std::int64_t nonmonotone_calls = 0;
  std::int64_t degraded_slots = 0;
  std::int64_t true_degraded_slots = 0;
  std::int64_t overhead_mismatches = 0;
  int failed_drops = 0;
};

struct CampaignResult {
  ScenarioConfig config;
  std::vector<DropResult> drops;
  MetricsReport report;
};

MetricsReport aggregate(const ScenarioConfig& cfg, const std::vector<DropResult>& drops,
                        int failed_drops = 0);
std::vector<CdfPoint> empirical_cdf(std::vector<double> samples);

/// Drops run in parallel under ExecPolicy::Parallel; aggregation is in drop
/// order either way.
CampaignResult run_campaign(const ScenarioConfig& cfg);

/// Percent gain of `fd` over `hd`.
double gain_percent(double fd, double hd);

struct OverheadReport {
  int num_cells = 0;
  int ues_per_cell = 0;
  double k = 0.0;
  double mean_rounds = 0.0;
  int centralized_bits = 0;          // closed form, K and n_I rounded
  int distributed_bits = 0;
  double ue_measurement_kbps = 0.0;
  std::int64_t mismatches = 0;       // per-BS, per-slot log vs formula
  double measured_distributed_bits = 0.0;  // mean per BS per coordinated slot
};

OverheadReport overhead_report(const CampaignResult& run);

nlohmann::json summary_json(const std::vector<CampaignResult>& runs);
nlohmann::json to_json(const OverheadReport& r);

/// Writes results.csv, cdf_dl.csv, cdf_ul.csv, summary.json, convergence.csv,
/// overhead.json and (when messages were kept) messages.jsonl.
void write_outputs(const std::string& dir, const std::vector<CampaignResult>& runs);

}  // namespace fdmr
