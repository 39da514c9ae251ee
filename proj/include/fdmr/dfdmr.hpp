#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdmr/channel.hpp"
#include "fdmr/gp.hpp"
#include "fdmr/link.hpp"
#include "fdmr/pf.hpp"
#include "fdmr/topology.hpp"

namespace fdmr {

/// Which UEs may be picked in each direction (FTP: only UEs with pending
/// data). Empty vectors mean every UE is eligible.
struct Eligibility {
  std::vector<char> dl;
  std::vector<char> ul;
  bool allows(int ue, Direction d) const {
    const auto& v = d == Direction::Downlink ? dl : ul;
    return v.empty() || v[ue] != 0;
  }
};

/// Candidate set for per-cell selection.
enum class SelectionMode {
  FullDuplex,    // any (dl, ul) pair incl. empty sides
  DownlinkOnly,
  UplinkOnly,
  SingleLink,    // one link in either direction
};

struct CellChoice {
  CellSchedule sched;
  double utility = 0.0;
};

/// Exhaustive intra-cell search at maximum powers with the intra-cell SINRs.
/// Ties keep the first candidate in the order: each DL UE (lowest index
/// first) with no UL UE, then with each UL UE; then UL-only; idle last.
CellChoice intra_cell_select(int b, const Topology& topo, const ChannelGains& g,
                             const RateTracker& tracker, const LinkBudget& budget,
                             SelectionMode mode = SelectionMode::FullDuplex,
                             const Eligibility& elig = {}, LogBase base = LogBase::Natural);

// --- protocol messages --------------------------------------------------------

enum class MessageKind { Init, InterferenceReport, PowerUpdate };

/// Init broadcast of BS `sender`. Fixed format: two weights, two UE ids,
/// 2M per-BS gains and one entry per forwarded UE-to-UE gain.
struct InitMessage {
  int sender = 0;
  std::optional<int> dl_ue;
  std::optional<int> ul_ue;
  double w_dl = 0.0;
  double w_ul = 0.0;
  std::vector<double> g_bs_to_dl_ue;   // [i] gain from BS i to this cell's DL UE
  std::vector<double> g_ul_ue_to_bs;   // [i] gain from cell i's UL UE to this BS
  /// (cell i, measured gain from cell i's UL UE to this cell's DL UE).
  std::vector<std::pair<int, double>> ue_ue;

  int fields() const;
};

struct BsMessage {
  MessageKind kind = MessageKind::Init;
  std::int64_t slot = 0;
  int round = 0;  // 0 for Init
  int sender = 0;
  std::vector<double> values;
  int fields = 0;
  int bits() const { return 8 * fields; }
};

nlohmann::json to_json(const BsMessage& m);
const char* to_string(MessageKind k);

/// What BS b knows: every Init plus the rows it measures itself.
struct BsAgent {
  int cell = 0;
  int num_cells = 0;
  std::vector<InitMessage> inits;       // indexed by sender, own included
  std::vector<double> g_bs_to_me;       // [i] BS i -> BS b
  double g_intra = 0.0;                 // own UL UE -> own DL UE, measured
  /// (i, j): cell i's UL UE -> cell j's DL UE as forwarded in j's Init.
  Eigen::MatrixXd ue_ue;
  double gamma = 0.0;
  double noise_ue = 0.0;
  double noise_bs = 0.0;
  double p_max_dl = 0.0;
  double p_max_ul = 0.0;
  double rate_cap = 6.0;
};

/// Builds every BS's Init message for the given selection.
std::vector<InitMessage> init_round(const ScheduleDecision& sched, const ChannelGains& g,
                                    const RateTracker& tracker);

/// Agent for BS b from the Init broadcasts and b's own measurements.
BsAgent make_agent(int b, const std::vector<InitMessage>& inits, const ChannelGains& g,
                   const LinkBudget& budget);

struct InterferenceReport {
  double dl = 0.0;  // at the cell's DL UE, watts
  double ul = 0.0;  // at the BS, incl. residual self-interference
};

/// Estimated interference at cell b's receivers for powers p (measured
/// UE-to-UE gains, true BS gains).
InterferenceReport estimate_interference(const BsAgent& agent, const PowerAllocation& p);

/// Local two-variable problem of BS b. Variables are b's present links in
/// order (DL, UL); absent links get index -1. `clamps` counts constants that
/// had to be raised to the noise floor.
struct LocalProblem {
  PowerProblem problem;
  int dl_var = -1;
  int ul_var = -1;
  int clamps = 0;
};

LocalProblem build_local_problem(const BsAgent& agent, const PowerAllocation& stale,
                                 const std::vector<InterferenceReport>& reports);

struct PowerUpdateResult {
  CellPower power;
  bool solver_converged = true;
  bool monotone = true;
  int clamps = 0;
};

/// A BS only moves when its exact local objective rises by more than
/// `improve_tol` (relative); otherwise it repeats its stale powers.
PowerUpdateResult power_update(const BsAgent& agent, const PowerAllocation& stale,
                               const std::vector<InterferenceReport>& reports,
                               const SolverConfig& solver, double improve_tol = 1e-4);

struct CoordinationConfig {
  int max_rounds = 20;
  double tol_db = 1e-3;
  double improve_tol = 1e-4;
  SolverConfig solver;
  ExecPolicy policy = ExecPolicy::Serial;
  bool record_messages = false;
};

struct CoordinationResult {
  PowerAllocation powers;
  int rounds = 0;           // n_I
  bool terminated = false;
  int clamps = 0;
  int solver_calls = 0;
  int solver_failures = 0;
  int nonmonotone_calls = 0;
  double objective_start = 0.0;  // estimated, at max power
  double objective_final = 0.0;  // estimated, at returned powers
  std::vector<int> init_fields;  // per BS
  std::vector<int> bits_init;    // per BS, counted as messages are sent
  std::vector<int> bits_rounds;
  std::vector<BsMessage> log;    // only with record_messages
};

/// Estimated network objective sum of ln(1 + w R) with capped rates, as each
/// BS sees its own links.
double estimated_objective(const std::vector<BsAgent>& agents, const PowerAllocation& p);

/// Synchronous rounds: every BS reports interference, then re-solves its
/// local problem against the previous round's snapshot.
CoordinationResult run_coordination(const ScheduleDecision& sched, const ChannelGains& g,
                                    const RateTracker& tracker, const LinkBudget& budget,
                                    const CoordinationConfig& cfg, std::int64_t slot = 0);

// --- signalling overhead ------------------------------------------------------

int centralized_bits_per_tti(int M, int n_m, int k);
int distributed_init_bits(int M, int k);
int distributed_round_bits(int rounds);
/// 8-bit gain per strong interferer every 2 ms, per UE, summed over a cell.
double ue_measurement_kbps(double k, int n_m);

struct SignalingAccount {
  int init_bits = 0;        // measured from the log
  int round_bits = 0;
  int closed_form_init = 0; // formula with the same M, K_b, n_I
  int closed_form_rounds = 0;
  bool matches() const { return init_bits == closed_form_init && round_bits == closed_form_rounds; }
};

/// Per-BS measured vs closed-form bit counts for one coordinated slot. K_b
/// is recounted from the selection and the measured gains.
std::vector<SignalingAccount> signaling_accounting(const CoordinationResult& res,
                                                   const ScheduleDecision& sched,
                                                   const ChannelGains& g);

}  // namespace fdmr
