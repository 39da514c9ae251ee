#include "fdmr/cfdmr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fdmr {

namespace {

struct Candidate {
  std::optional<int> dl;
  std::optional<int> ul;
};

// Same visiting order as the intra-cell search so ties resolve identically.
std::vector<Candidate> candidates(const std::vector<int>& ues, const Eligibility& elig) {
  std::vector<Candidate> out;
  for (int i : ues) {
    if (!elig.allows(i, Direction::Downlink)) continue;
    out.push_back({i, std::nullopt});
    for (int j : ues) {
      if (j != i && elig.allows(j, Direction::Uplink)) out.push_back({i, j});
    }
  }
  for (int j : ues) {
    if (elig.allows(j, Direction::Uplink)) out.push_back({std::nullopt, j});
  }
  return out;
}

double utility(double w, double signal, double interference, const LinkBudget& budget,
               LogBase base) {
  return chi(w, rate(signal / interference, budget), base);
}

}  // namespace

GreedyResult greedy_select(const Topology& topo, const ChannelGains& g, const RateTracker& tracker,
                           const LinkBudget& budget, std::mt19937_64& rng,
                           const Eligibility& elig, LogBase base) {
  const int M = topo.num_cells();
  const double pd = budget.p_max_dl;
  const double pu = budget.p_max_ul;
  GreedyResult res;
  res.sched.assign(M, {});
  res.order.resize(M);
  std::iota(res.order.begin(), res.order.end(), 0);
  std::shuffle(res.order.begin(), res.order.end(), rng);

  // Interference accumulated at each decided receiver, excluding noise.
  std::vector<double> i_dl(M, 0.0), i_ul(M, 0.0), phi(M, 0.0);
  std::vector<int> decided;

  auto cell_phi = [&](int c, double idl, double iul) {
    double u = 0.0;
    const auto& s = res.sched[c];
    if (s.dl) u += utility(tracker.weight(*s.dl, Direction::Downlink), pd * g.bs_ue(c, *s.dl),
                           budget.noise_ue + idl, budget, base);
    if (s.ul) u += utility(tracker.weight(*s.ul, Direction::Uplink), pu * g.bs_ue(c, *s.ul),
                           budget.noise_bs + iul, budget, base);
    return u;
  };
  // Extra interference a candidate of cell b puts on decided cell c.
  auto extra = [&](int b, const Candidate& k, int c) {
    const auto& s = res.sched[c];
    double dl = 0.0, ul = 0.0;
    if (s.dl) {
      if (k.dl) dl += pd * g.bs_ue(b, *s.dl);
      if (k.ul) dl += pu * g.measured(*k.ul, *s.dl);
    }
    if (s.ul) {
      if (k.ul) ul += pu * g.bs_ue(c, *k.ul);
      if (k.dl) ul += pd * g.bs_bs(b, c);
    }
    return std::pair{dl, ul};
  };

  for (int b : res.order) {
    const auto cands = candidates(topo.cells[b], elig);
    double base_ul = 0.0;
    for (int c : decided) {
      const auto& s = res.sched[c];
      if (s.ul) base_ul += pu * g.bs_ue(b, *s.ul);
      if (s.dl) base_ul += pd * g.bs_bs(c, b);
    }
    Candidate best{};
    double best_net = 0.0;  // idle
    for (const auto& k : cands) {
      double own = 0.0;
      if (k.dl) {
        double idl = budget.noise_ue;
        for (int c : decided) {
          const auto& s = res.sched[c];
          if (s.dl) idl += pd * g.bs_ue(c, *k.dl);
          if (s.ul) idl += pu * g.measured(*s.ul, *k.dl);
        }
        if (k.ul) idl += pu * g.measured(*k.ul, *k.dl);
        own += utility(tracker.weight(*k.dl, Direction::Downlink), pd * g.bs_ue(b, *k.dl), idl,
                       budget, base);
      }
      if (k.ul) {
        const double iul = budget.noise_bs + base_ul + (k.dl ? pd * budget.gamma : 0.0);
        own += utility(tracker.weight(*k.ul, Direction::Uplink), pu * g.bs_ue(b, *k.ul), iul,
                       budget, base);
      }
      double loss = 0.0;
      for (int c : decided) {
        const auto [dl, ul] = extra(b, k, c);
        if (dl > 0.0 || ul > 0.0) loss += phi[c] - cell_phi(c, i_dl[c] + dl, i_ul[c] + ul);
      }
      const double net = own - loss;
      if (net > best_net) {
        best_net = net;
        best = k;
      }
    }
    if (best_net < 0.0) throw std::logic_error("greedy accepted a negative net gain");
    res.sched[b] = {best.dl, best.ul};
    res.steps.push_back({b, best_net});

    for (int c : decided) {
      const auto [dl, ul] = extra(b, best, c);
      i_dl[c] += dl;
      i_ul[c] += ul;
      phi[c] = cell_phi(c, i_dl[c], i_ul[c]);
    }
    const auto& s = res.sched[b];
    for (int c : decided) {
      const auto& o = res.sched[c];
      if (s.dl) {
        if (o.dl) i_dl[b] += pd * g.bs_ue(c, *s.dl);
        if (o.ul) i_dl[b] += pu * g.measured(*o.ul, *s.dl);
      }
    }
    if (s.dl && s.ul) i_dl[b] += pu * g.measured(*s.ul, *s.dl);
    i_ul[b] = base_ul + (s.dl && s.ul ? pd * budget.gamma : 0.0);
    decided.push_back(b);
    phi[b] = cell_phi(b, i_dl[b], i_ul[b]);
  }
  return res;
}

NetworkProblem build_network_problem(const ScheduleDecision& sched, const ChannelGains& g,
                                     const RateTracker& tracker, const LinkBudget& budget) {
  const int M = static_cast<int>(sched.size());
  NetworkProblem np;
  np.var_dl.assign(M, -1);
  np.var_ul.assign(M, -1);
  auto& pr = np.problem;
  pr.rate_cap = budget.rate_cap;
  for (int b = 0; b < M; ++b) {
    if (sched[b].dl) {
      np.var_dl[b] = pr.size();
      pr.vars.push_back({2 * b, budget.p_max_dl});
    }
    if (sched[b].ul) {
      np.var_ul[b] = pr.size();
      pr.vars.push_back({2 * b + 1, budget.p_max_ul});
    }
  }
  auto couple = [](RateTerm& t, int var, double gain) {
    if (var >= 0 && gain > 0.0) t.coupling.emplace_back(var, gain);
  };
  for (int b = 0; b < M; ++b) {
    if (const auto i = sched[b].dl) {
      RateTerm t;
      t.weight = tracker.weight(*i, Direction::Downlink);
      t.signal_var = np.var_dl[b];
      t.signal_gain = g.bs_ue(b, *i);
      t.noise = budget.noise_ue;
      for (int c = 0; c < M; ++c) {
        if (c != b && sched[c].dl) couple(t, np.var_dl[c], g.bs_ue(c, *i));
        if (sched[c].ul) couple(t, np.var_ul[c], g.measured(*sched[c].ul, *i));
      }
      pr.terms.push_back(std::move(t));
    }
    if (const auto j = sched[b].ul) {
      RateTerm t;
      t.weight = tracker.weight(*j, Direction::Uplink);
      t.signal_var = np.var_ul[b];
      t.signal_gain = g.bs_ue(b, *j);
      t.noise = budget.noise_bs;
      couple(t, np.var_dl[b], budget.gamma);
      for (int c = 0; c < M; ++c) {
        if (c == b) continue;
        if (sched[c].dl) couple(t, np.var_dl[c], g.bs_bs(c, b));
        if (sched[c].ul) couple(t, np.var_ul[c], g.bs_ue(b, *sched[c].ul));
      }
      pr.terms.push_back(std::move(t));
    }
  }
  return np;
}

CentralizedResult centralized_power_allocate(const ScheduleDecision& sched, const ChannelGains& g,
                                             const RateTracker& tracker, const LinkBudget& budget,
                                             const SolverConfig& solver, int max_sweeps,
                                             double improve_tol) {
  const int M = static_cast<int>(sched.size());
  const NetworkProblem np = build_network_problem(sched, g, tracker, budget);
  CentralizedResult res;
  res.powers = max_power_allocation(sched, budget);
  const int n = np.problem.size();
  if (n == 0) {
    res.converged = true;
    return res;
  }
  std::vector<double> start(n);
  for (int v = 0; v < n; ++v) start[v] = np.problem.vars[v].upper;
  res.objective_start = np.problem.exact_objective(start);
  res.objective_final = res.objective_start;

  const SolverReport rep = solve_signomial(np.problem, start, solver);
  res.converged = rep.converged;
  res.monotone = rep.monotone;
  std::vector<double> cand = rep.powers;
  const bool usable = static_cast<int>(cand.size()) == n &&
                      std::all_of(cand.begin(), cand.end(), [](double x) { return std::isfinite(x); });
  if (!usable) {
    res.fallback = true;
    return res;
  }
  snap_to_zero(np.problem, cand);

  // The network GP ignores the rate cap, so its optimum can sit below max
  // power in the exact objective. Per-cell exact ascent with full
  // information, run from both max power and the GP point.
  auto polish = [&](std::vector<double> x, int& sweeps) {
    for (sweeps = 0; sweeps < max_sweeps;) {
      bool moved = false;
      for (int b = 0; b < M; ++b) {
        std::vector<int> block;
        if (np.var_dl[b] >= 0) block.push_back(np.var_dl[b]);
        if (np.var_ul[b] >= 0) block.push_back(np.var_ul[b]);
        if (block.empty()) continue;
        const PowerProblem sub = restrict_problem(np.problem, block, x);
        std::vector<double> prev(block.size());
        for (std::size_t k = 0; k < block.size(); ++k) prev[k] = x[block[k]];
        // Each block is tried from its current values and from its caps.
        std::vector<double> caps(block.size());
        for (std::size_t k = 0; k < block.size(); ++k) caps[k] = sub.vars[k].upper;
        std::vector<double> y = prev;
        double f_y = sub.exact_objective(prev);
        const double f_prev = f_y;
        for (const auto* from : {&prev, &caps}) {
          const SolverReport rep_b = solve_signomial(sub, *from, solver);
          res.monotone = res.monotone && rep_b.monotone;
          std::vector<double> z = rep_b.powers;
          if (z.size() != prev.size()) continue;
          snap_to_zero(sub, z);
          for (const std::vector<double>* c : {static_cast<const std::vector<double>*>(&z), from}) {
            if (const double fc = sub.exact_objective(*c); fc > f_y) {
              f_y = fc;
              y = *c;
            }
          }
        }
        if (!(f_y > f_prev + improve_tol * std::abs(f_prev))) continue;
        for (std::size_t k = 0; k < block.size(); ++k) x[block[k]] = y[k];
        moved = true;
      }
      ++sweeps;
      if (!moved) break;
    }
    return x;
  };
  int sweeps_a = 0, sweeps_b = 0;
  std::vector<double> x = polish(start, sweeps_a);
  const std::vector<double> xb = polish(cand, sweeps_b);
  res.sweeps = sweeps_a + sweeps_b;
  double f = np.problem.exact_objective(x);
  if (const double fb = np.problem.exact_objective(xb); fb > f) {
    x = xb;
    f = fb;
  }
  if (!(f > res.objective_start)) return res;
  res.objective_final = f;
  for (int b = 0; b < M; ++b) {
    if (np.var_dl[b] >= 0) res.powers[b].dl = x[np.var_dl[b]];
    if (np.var_ul[b] >= 0) res.powers[b].ul = x[np.var_ul[b]];
  }
  return res;
}

}  // namespace fdmr
