#include "fdmr/dfdmr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fdmr {

// --- intra-cell selection -----------------------------------------------------

CellChoice intra_cell_select(int b, const Topology& topo, const ChannelGains& g,
                             const RateTracker& tracker, const LinkBudget& budget,
                             SelectionMode mode, const Eligibility& elig, LogBase base) {
  const auto& ues = topo.cells.at(b);
  const CellPower pmax{budget.p_max_dl, budget.p_max_ul};
  CellChoice best;  // idle, utility 0

  auto consider = [&](std::optional<int> dl, std::optional<int> ul) {
    const SinrPair s = intra_cell_sinr(b, dl, ul, pmax, g, budget);
    double u = 0.0;
    if (dl) u += chi(tracker.weight(*dl, Direction::Downlink), rate(s.dl, budget), base);
    if (ul) u += chi(tracker.weight(*ul, Direction::Uplink), rate(s.ul, budget), base);
    if (u > best.utility) {
      best = {{dl, ul}, u};
    }
  };

  const bool want_dl = mode != SelectionMode::UplinkOnly;
  const bool want_ul = mode != SelectionMode::DownlinkOnly;
  const bool pairs = mode == SelectionMode::FullDuplex;
  if (want_dl) {
    for (int i : ues) {
      if (!elig.allows(i, Direction::Downlink)) continue;
      consider(i, std::nullopt);
      if (!pairs) continue;
      for (int j : ues) {
        if (j != i && elig.allows(j, Direction::Uplink)) consider(i, j);
      }
    }
  }
  if (want_ul) {
    for (int j : ues) {
      if (elig.allows(j, Direction::Uplink)) consider(std::nullopt, j);
    }
  }
  return best;
}

// --- messages -----------------------------------------------------------------

int InitMessage::fields() const {
  return 4 + static_cast<int>(g_bs_to_dl_ue.size() + g_ul_ue_to_bs.size() + ue_ue.size());
}

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Init: return "init";
    case MessageKind::InterferenceReport: return "interference_report";
    case MessageKind::PowerUpdate: return "power_update";
  }
  return "?";
}

nlohmann::json to_json(const BsMessage& m) {
  return {{"slot", m.slot},   {"round", m.round},   {"kind", to_string(m.kind)},
          {"from", m.sender}, {"fields", m.fields}, {"bits", m.bits()},
          {"values", m.values}};
}

std::vector<InitMessage> init_round(const ScheduleDecision& sched, const ChannelGains& g,
                                    const RateTracker& tracker) {
  const int M = static_cast<int>(sched.size());
  std::vector<InitMessage> out(M);
  for (int j = 0; j < M; ++j) {
    auto& m = out[j];
    m.sender = j;
    m.dl_ue = sched[j].dl;
    m.ul_ue = sched[j].ul;
    if (m.dl_ue) m.w_dl = tracker.weight(*m.dl_ue, Direction::Downlink);
    if (m.ul_ue) m.w_ul = tracker.weight(*m.ul_ue, Direction::Uplink);
    m.g_bs_to_dl_ue.assign(M, 0.0);
    m.g_ul_ue_to_bs.assign(M, 0.0);
    for (int i = 0; i < M; ++i) {
      if (m.dl_ue) m.g_bs_to_dl_ue[i] = g.bs_ue(i, *m.dl_ue);
      if (sched[i].ul) m.g_ul_ue_to_bs[i] = g.bs_ue(j, *sched[i].ul);
      if (i != j && m.dl_ue && sched[i].ul) {
        const double gt = g.measured(*sched[i].ul, *m.dl_ue);
        if (gt > 0.0) m.ue_ue.emplace_back(i, gt);
      }
    }
  }
  return out;
}

BsAgent make_agent(int b, const std::vector<InitMessage>& inits, const ChannelGains& g,
                   const LinkBudget& budget) {
  const int M = static_cast<int>(inits.size());
  BsAgent a;
  a.cell = b;
  a.num_cells = M;
  a.inits = inits;
  a.g_bs_to_me.assign(M, 0.0);
  for (int i = 0; i < M; ++i) a.g_bs_to_me[i] = i == b ? 0.0 : g.bs_bs(i, b);
  const auto& own = inits.at(b);
  if (own.dl_ue && own.ul_ue) a.g_intra = g.measured(*own.ul_ue, *own.dl_ue);
  a.ue_ue = Eigen::MatrixXd::Zero(M, M);
  for (int j = 0; j < M; ++j) {
    for (const auto& [i, gt] : inits[j].ue_ue) a.ue_ue(i, j) = gt;
  }
  a.gamma = budget.gamma;
  a.noise_ue = budget.noise_ue;
  a.noise_bs = budget.noise_bs;
  a.p_max_dl = budget.p_max_dl;
  a.p_max_ul = budget.p_max_ul;
  a.rate_cap = budget.rate_cap;
  return a;
}

// --- estimation and local problem --------------------------------------------

InterferenceReport estimate_interference(const BsAgent& a, const PowerAllocation& p) {
  const int b = a.cell;
  const auto& own = a.inits[b];
  InterferenceReport r{a.noise_ue, a.noise_bs};
  if (own.dl_ue) {
    r.dl += p[b].ul * a.g_intra;
    for (int i = 0; i < a.num_cells; ++i) {
      if (i == b) continue;
      r.dl += p[i].dl * own.g_bs_to_dl_ue[i] + p[i].ul * a.ue_ue(i, b);
    }
  }
  if (own.ul_ue) {
    r.ul += p[b].dl * a.gamma;
    for (int i = 0; i < a.num_cells; ++i) {
      if (i == b) continue;
      r.ul += p[i].ul * own.g_ul_ue_to_bs[i] + p[i].dl * a.g_bs_to_me[i];
    }
  }
  return r;
}

LocalProblem build_local_problem(const BsAgent& a, const PowerAllocation& stale,
                                 const std::vector<InterferenceReport>& reports) {
  const int b = a.cell;
  const auto& own = a.inits[b];
  LocalProblem lp;
  auto& pr = lp.problem;
  pr.rate_cap = a.rate_cap;
  if (own.dl_ue) {
    lp.dl_var = pr.size();
    pr.vars.push_back({2 * b, a.p_max_dl});
  }
  if (own.ul_ue) {
    lp.ul_var = pr.size();
    pr.vars.push_back({2 * b + 1, a.p_max_ul});
  }
  if (pr.size() == 0) return lp;

  const double xp = stale[b].dl;
  const double yp = stale[b].ul;
  auto floor_at = [&](double c, double noise) {
    if (c < noise * (1.0 - 1e-6)) ++lp.clamps;
    return std::max(c, noise);
  };
  auto add_coupling = [](RateTerm& t, int var, double gain) {
    if (var >= 0 && gain > 0.0) t.coupling.emplace_back(var, gain);
  };

  if (own.dl_ue) {
    RateTerm t;
    t.weight = own.w_dl;
    t.signal_var = lp.dl_var;
    t.signal_gain = own.g_bs_to_dl_ue[b];
    t.noise = floor_at(reports[b].dl - yp * a.g_intra, a.noise_ue);
    add_coupling(t, lp.ul_var, a.g_intra);
    pr.terms.push_back(std::move(t));
  }
  if (own.ul_ue) {
    RateTerm t;
    t.weight = own.w_ul;
    t.signal_var = lp.ul_var;
    t.signal_gain = own.g_ul_ue_to_bs[b];
    t.noise = floor_at(reports[b].ul - xp * a.gamma, a.noise_bs);
    add_coupling(t, lp.dl_var, a.gamma);
    pr.terms.push_back(std::move(t));
  }
  for (int j = 0; j < a.num_cells; ++j) {
    if (j == b) continue;
    const auto& other = a.inits[j];
    if (other.dl_ue && stale[j].dl > 0.0) {
      const double gx = own.dl_ue ? other.g_bs_to_dl_ue[b] : 0.0;
      const double gy = own.ul_ue ? a.ue_ue(b, j) : 0.0;
      RateTerm t;
      t.weight = other.w_dl;
      t.signal_const = stale[j].dl * other.g_bs_to_dl_ue[j];
      t.noise = floor_at(reports[j].dl - xp * gx - yp * gy, a.noise_ue);
      add_coupling(t, lp.dl_var, gx);
      add_coupling(t, lp.ul_var, gy);
      pr.terms.push_back(std::move(t));
    }
    if (other.ul_ue && stale[j].ul > 0.0) {
      const double gx = own.dl_ue ? a.g_bs_to_me[j] : 0.0;  // reciprocal BS-BS
      const double gy = own.ul_ue ? other.g_ul_ue_to_bs[b] : 0.0;
      RateTerm t;
      t.weight = other.w_ul;
      t.signal_const = stale[j].ul * other.g_ul_ue_to_bs[j];
      t.noise = floor_at(reports[j].ul - xp * gx - yp * gy, a.noise_bs);
      add_coupling(t, lp.dl_var, gx);
      add_coupling(t, lp.ul_var, gy);
      pr.terms.push_back(std::move(t));
    }
  }
  return lp;
}

PowerUpdateResult power_update(const BsAgent& a, const PowerAllocation& stale,
                               const std::vector<InterferenceReport>& reports,
                               const SolverConfig& solver, double improve_tol) {
  const LocalProblem lp = build_local_problem(a, stale, reports);
  PowerUpdateResult out;
  out.clamps = lp.clamps;
  out.power = stale[a.cell];
  if (lp.problem.size() == 0) return out;

  std::vector<double> prev(lp.problem.size());
  if (lp.dl_var >= 0) prev[lp.dl_var] = stale[a.cell].dl;
  if (lp.ul_var >= 0) prev[lp.ul_var] = stale[a.cell].ul;

  const SolverReport rep = solve_signomial(lp.problem, prev, solver);
  out.solver_converged = rep.converged;
  out.monotone = rep.monotone;
  if (!rep.converged) return out;

  std::vector<double> cand = rep.powers;
  snap_to_zero(lp.problem, cand);
  // The linearized surrogate ignores the rate cap and can disagree with the
  // exact objective; only a strict exact improvement justifies a move.
  const double f_prev = lp.problem.exact_objective(prev);
  if (!(lp.problem.exact_objective(cand) > f_prev + improve_tol * std::abs(f_prev))) cand = prev;
  if (lp.dl_var >= 0) out.power.dl = cand[lp.dl_var];
  if (lp.ul_var >= 0) out.power.ul = cand[lp.ul_var];
  return out;
}

double estimated_objective(const std::vector<BsAgent>& agents, const PowerAllocation& p) {
  double total = 0.0;
  for (const auto& a : agents) {
    const int b = a.cell;
    const auto& own = a.inits[b];
    const InterferenceReport r = estimate_interference(a, p);
    if (own.dl_ue) {
      const double s = p[b].dl * own.g_bs_to_dl_ue[b] / r.dl;
      total += std::log1p(own.w_dl * std::min(a.rate_cap, std::log2(1.0 + s)));
    }
    if (own.ul_ue) {
      const double s = p[b].ul * own.g_ul_ue_to_bs[b] / r.ul;
      total += std::log1p(own.w_ul * std::min(a.rate_cap, std::log2(1.0 + s)));
    }
  }
  return total;
}

// --- coordination -------------------------------------------------------------

namespace {

double change_db(double a, double b) {
  if (a == b) return 0.0;
  if (a == 0.0 || b == 0.0) return kInf;
  return std::abs(10.0 * std::log10(a / b));
}

std::vector<double> init_values(const InitMessage& m) {
  std::vector<double> v{m.w_dl, m.w_ul, m.dl_ue ? double(*m.dl_ue) : -1.0,
                        m.ul_ue ? double(*m.ul_ue) : -1.0};
  v.insert(v.end(), m.g_bs_to_dl_ue.begin(), m.g_bs_to_dl_ue.end());
  v.insert(v.end(), m.g_ul_ue_to_bs.begin(), m.g_ul_ue_to_bs.end());
  for (const auto& e : m.ue_ue) v.push_back(e.second);
  return v;
}

}  // namespace

CoordinationResult run_coordination(const ScheduleDecision& sched, const ChannelGains& g,
                                    const RateTracker& tracker, const LinkBudget& budget,
                                    const CoordinationConfig& cfg, std::int64_t slot) {
  if (cfg.max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
  const int M = static_cast<int>(sched.size());
  CoordinationResult res;
  res.bits_init.assign(M, 0);
  res.bits_rounds.assign(M, 0);

  const auto inits = init_round(sched, g, tracker);
  std::vector<BsAgent> agents;
  agents.reserve(M);
  for (int b = 0; b < M; ++b) {
    agents.push_back(make_agent(b, inits, g, budget));
    res.init_fields.push_back(inits[b].fields());
    res.bits_init[b] = 8 * inits[b].fields();
    if (cfg.record_messages) {
      res.log.push_back({MessageKind::Init, slot, 0, b, init_values(inits[b]), inits[b].fields()});
    }
  }

  PowerAllocation p = max_power_allocation(sched, budget);
  PowerAllocation best = p;
  double best_obj = estimated_objective(agents, p);
  res.objective_start = best_obj;

  std::vector<InterferenceReport> reports(M);
  std::vector<PowerUpdateResult> updates(M);
  const bool parallel = cfg.policy == ExecPolicy::Parallel;
  for (int n = 1; n <= cfg.max_rounds; ++n) {
    for (int b = 0; b < M; ++b) reports[b] = estimate_interference(agents[b], p);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int b = 0; b < M; ++b) updates[b] = power_update(agents[b], p, reports, cfg.solver, cfg.improve_tol);

    double change = 0.0;
    PowerAllocation next(M);
    for (int b = 0; b < M; ++b) {
      next[b] = updates[b].power;
      change = std::max({change, change_db(p[b].dl, next[b].dl), change_db(p[b].ul, next[b].ul)});
      res.clamps += updates[b].clamps;
      if (agents[b].inits[b].dl_ue || agents[b].inits[b].ul_ue) {
        ++res.solver_calls;
        res.solver_failures += updates[b].solver_converged ? 0 : 1;
        res.nonmonotone_calls += updates[b].monotone ? 0 : 1;
      }
      res.bits_rounds[b] += 8 * 4;
      if (cfg.record_messages) {
        res.log.push_back({MessageKind::InterferenceReport, slot, n, b, {reports[b].dl, reports[b].ul}, 2});
        res.log.push_back({MessageKind::PowerUpdate, slot, n, b, {next[b].dl, next[b].ul}, 2});
      }
    }
    p = std::move(next);
    res.rounds = n;
    const double obj = estimated_objective(agents, p);
    if (obj > best_obj) {
      best_obj = obj;
      best = p;
    }
    if (change < cfg.tol_db) {
      res.terminated = true;
      break;
    }
  }
  res.powers = std::move(best);
  res.objective_final = best_obj;
  return res;
}

// --- overhead -----------------------------------------------------------------

int centralized_bits_per_tti(int M, int n_m, int k) { return (M + M * n_m + n_m * k) * 8; }
int distributed_init_bits(int M, int k) { return (2 + 2 + 2 * M + k) * 8; }
int distributed_round_bits(int rounds) { return (2 + 2) * rounds * 8; }
double ue_measurement_kbps(double k, int n_m) { return 4.0 * k * n_m; }

std::vector<SignalingAccount> signaling_accounting(const CoordinationResult& res,
                                                   const ScheduleDecision& sched,
                                                   const ChannelGains& g) {
  const int M = static_cast<int>(sched.size());
  std::vector<SignalingAccount> out(M);
  for (int b = 0; b < M; ++b) {
    int k = 0;
    for (int i = 0; i < M; ++i) {
      if (i != b && sched[b].dl && sched[i].ul && g.measured(*sched[i].ul, *sched[b].dl) > 0.0) ++k;
    }
    out[b].init_bits = res.bits_init.at(b);
    out[b].round_bits = res.bits_rounds.at(b);
    out[b].closed_form_init = distributed_init_bits(M, k);
    out[b].closed_form_rounds = distributed_round_bits(res.rounds);
  }
  return out;
}

}  // namespace fdmr
