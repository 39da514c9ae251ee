#include "fdmr/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fdmr {

void PowerProblem::validate() const {
  const int n = size();
  for (const auto& v : vars) {
    if (!(v.upper > 0.0)) throw std::invalid_argument("variable upper bound must be > 0");
  }
  for (const auto& t : terms) {
    if (t.weight < 0.0) throw std::invalid_argument("negative term weight");
    if (!(t.noise > 0.0)) throw std::invalid_argument("term noise constant must be > 0");
    if (t.signal_var >= n) throw std::invalid_argument("signal variable out of range");
    if (t.signal_gain < 0.0 || t.signal_const < 0.0) throw std::invalid_argument("negative signal");
    for (const auto& [v, a] : t.coupling) {
      if (v < 0 || v >= n) throw std::invalid_argument("coupling variable out of range");
      if (a < 0.0) throw std::invalid_argument("negative coupling gain");
    }
  }
}

double PowerProblem::sinr(const RateTerm& t, std::span<const double> p) const {
  double d = t.noise;
  for (const auto& [v, a] : t.coupling) d += a * p[v];
  const double s = t.signal_var >= 0 ? t.signal_gain * p[t.signal_var] : t.signal_const;
  return s / d;
}

double PowerProblem::linear_objective(std::span<const double> p) const {
  double f = 0.0;
  for (const auto& t : terms) {
    if (t.weight > 0.0) f += t.weight * std::log2(1.0 + sinr(t, p));
  }
  return f;
}

double PowerProblem::exact_objective(std::span<const double> p) const {
  double f = 0.0;
  for (const auto& t : terms) {
    if (t.weight > 0.0) f += std::log1p(t.weight * std::min(rate_cap, std::log2(1.0 + sinr(t, p))));
  }
  return f;
}

void SolverConfig::validate() const {
  if (!(sca_tol_db > 0 && inner_tol > 0)) throw std::invalid_argument("tolerances must be > 0");
  if (max_sca_iters < 1 || max_inner_iters < 1) throw std::invalid_argument("iteration caps must be >= 1");
  if (!(p_min > 0)) throw std::invalid_argument("p_min must be > 0");
}

// --- condensed problem -------------------------------------------------------

double CondensedProblem::value(const Eigen::VectorXd& z) const {
  thread_local std::vector<double> ez;
  ez.resize(n);
  for (int i = 0; i < n; ++i) ez[i] = std::exp(z[i]);
  double f = -affine_const - affine.dot(z);
  for (const auto& t : lse) {
    double d = t.constant;
    for (const auto& [v, a] : t.coupling) d += a * ez[v];
    f += t.weight * std::log(d);
  }
  return f;
}

double CondensedProblem::evaluate(const Eigen::VectorXd& z, Eigen::VectorXd& grad,
                                  Eigen::MatrixXd& hess) const {
  grad = -affine;
  hess.setZero(n, n);
  double f = -affine_const - affine.dot(z);
  // Per-term softmax weights pi_v = a_v e^{z_v} / D.
  thread_local std::vector<std::pair<int, double>> pi;
  thread_local std::vector<double> ez;
  ez.resize(n);
  for (int i = 0; i < n; ++i) ez[i] = std::exp(z[i]);
  for (const auto& t : lse) {
    double d = t.constant;
    pi.clear();
    for (const auto& [v, a] : t.coupling) {
      const double m = a * ez[v];
      pi.emplace_back(v, m);
      d += m;
    }
    f += t.weight * std::log(d);
    for (auto& [v, m] : pi) m /= d;
    for (const auto& [v, m] : pi) {
      grad[v] += t.weight * m;
      hess(v, v) += t.weight * m;
      for (const auto& [u, k] : pi) hess(v, u) -= t.weight * m * k;
    }
  }
  return f;
}

double CondensedProblem::surrogate_objective(std::span<const double> p) const {
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = std::log(p[i]);
  return -value(z);
}

CondensedProblem condense(const PowerProblem& problem, std::span<const double> anchor,
                          double p_min, int* nudged) {
  const int n = problem.size();
  if (static_cast<int>(anchor.size()) != n) throw std::invalid_argument("anchor size mismatch");
  std::vector<double> p(anchor.begin(), anchor.end());
  int nudges = 0;
  for (auto& x : p) {
    if (!(x > 0.0)) {
      x = p_min;
      ++nudges;
    }
  }
  if (nudged) *nudged = nudges;

  CondensedProblem gp;
  gp.n = n;
  gp.affine = Eigen::VectorXd::Zero(n);
  gp.lse.reserve(problem.terms.size());
  for (const auto& t : problem.terms) {
    if (!(t.weight > 0.0)) continue;
    const double w = t.weight / std::numbers::ln2;
    gp.lse.push_back({w, t.noise, t.coupling});

    // Numerator monomials: constant, couplings, signal. Their weighted
    // geometric mean with weights lambda = share at the anchor lower-bounds
    // the numerator and touches it at the anchor.
    double num = t.noise + (t.signal_var < 0 ? t.signal_const : 0.0);
    for (const auto& [v, a] : t.coupling) num += a * p[v];
    if (t.signal_var >= 0) num += t.signal_gain * p[t.signal_var];
    const double log_num = std::log(num);
    gp.affine_const += w * log_num;
    auto add_monomial = [&](int v, double coeff) {
      const double lambda = coeff * p[v] / num;
      gp.affine[v] += w * lambda;
      gp.affine_const -= w * lambda * std::log(p[v]);
    };
    for (const auto& [v, a] : t.coupling) {
      if (a > 0.0) add_monomial(v, a);
    }
    if (t.signal_var >= 0 && t.signal_gain > 0.0) add_monomial(t.signal_var, t.signal_gain);
  }
  return gp;
}

// --- inner convex solve -------------------------------------------------------

namespace {

// Vec/Mat may be bounded-size Eigen types so small problems stay off the heap.
template <class Vec, class Mat>
InnerResult solve_condensed_impl(const CondensedProblem& gp, const Eigen::VectorXd& lo_in,
                                 const Eigen::VectorXd& hi_in, const Eigen::VectorXd& z0,
                                 const SolverConfig& cfg) {
  const int n = gp.n;
  InnerResult res;
  const Vec lo = lo_in, hi = hi_in;
  Vec z = z0.cwiseMax(lo_in).cwiseMin(hi_in);
  Vec grad(n), dir(n), trial(n), gf(n), df(n);
  Mat hess(n, n), hf(n, n);
  Eigen::VectorXd zbuf(n), gbuf(n);
  Eigen::MatrixXd hbuf(n, n);
  auto eval = [&](const Vec& at) {
    zbuf = at;
    const double v = gp.evaluate(zbuf, gbuf, hbuf);
    grad = gbuf;
    hess = hbuf;
    return v;
  };
  auto value = [&](const Vec& at) {
    zbuf = at;
    return gp.value(zbuf);
  };
  double f = eval(z);
  constexpr double kActive = 1e-10;
  std::vector<int> free;
  free.reserve(n);

  for (int it = 0; it < cfg.max_inner_iters; ++it) {
    res.iterations = it + 1;
    // Variables pinned at a face with the gradient pushing outward stay put.
    free.clear();
    double pg_norm = 0.0;
    for (int i = 0; i < n; ++i) {
      const bool at_lo = z[i] <= lo[i] + kActive && grad[i] > 0.0;
      const bool at_hi = z[i] >= hi[i] - kActive && grad[i] < 0.0;
      if (!at_lo && !at_hi) {
        free.push_back(i);
        pg_norm = std::max(pg_norm, std::abs(grad[i]));
      }
    }
    if (free.empty() || pg_norm <= 1e-12 * (1.0 + std::abs(f))) {
      res.converged = true;
      break;
    }

    const int k = static_cast<int>(free.size());
    hf.resize(k, k);
    gf.resize(k);
    for (int a = 0; a < k; ++a) {
      gf[a] = grad[free[a]];
      for (int b = 0; b < k; ++b) hf(a, b) = hess(free[a], free[b]);
    }
    const double reg = 1e-12 * (1.0 + hf.diagonal().cwiseAbs().maxCoeff());
    hf.diagonal().array() += reg;
    Eigen::LDLT<Mat> ldlt(hf);
    df = ldlt.solve(-gf);
    if (ldlt.info() != Eigen::Success || !df.allFinite() || gf.dot(df) >= 0.0) df = -gf;
    // Predicted decrease below rounding of f: nothing left to gain.
    if (-gf.dot(df) <= 1e-13 * (1.0 + std::abs(f))) {
      res.converged = true;
      break;
    }
    dir.setZero();
    for (int a = 0; a < k; ++a) dir[free[a]] = df[a];

    // Projected backtracking.
    double t = 1.0;
    bool accepted = false;
    double f_new = f;
    const double dir_max = dir.cwiseAbs().maxCoeff();
    for (int ls = 0; ls < 60 && t * dir_max > 1e-12; ++ls) {
      trial = (z + t * dir).cwiseMax(lo).cwiseMin(hi);
      f_new = value(trial);
      if (f_new <= f + 1e-4 * grad.dot(trial - z) && f_new < f) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.converged = true;  // no representable descent left
      break;
    }
    const double step = (trial - z).cwiseAbs().maxCoeff();
    const double decrease = f - f_new;
    z = trial;
    f = eval(z);
    if (decrease <= cfg.inner_tol * 1e-6 * (1.0 + std::abs(f)) && step < 1e-9) {
      res.converged = true;
      break;
    }
  }
  res.z = z;
  return res;
}

}  // namespace

InnerResult solve_condensed(const CondensedProblem& gp, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, const Eigen::VectorXd& z0,
                            const SolverConfig& cfg) {
  using Eigen::Dynamic;
  if (gp.n <= 4) {
    return solve_condensed_impl<Eigen::Matrix<double, Dynamic, 1, 0, 4, 1>,
                                Eigen::Matrix<double, Dynamic, Dynamic, 0, 4, 4>>(gp, lo, hi, z0, cfg);
  }
  return solve_condensed_impl<Eigen::VectorXd, Eigen::MatrixXd>(gp, lo, hi, z0, cfg);
}

// --- successive condensation --------------------------------------------------

namespace {

struct ScaRun {
  std::vector<double> powers;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  double best = -kInf;
  double worst_drop = 0.0;
};

ScaRun run_sca(const PowerProblem& problem, std::vector<double> p, const SolverConfig& cfg) {
  const int n = problem.size();
  Eigen::VectorXd lo(n), hi(n), z(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = std::log(cfg.p_min);
    hi[i] = std::log(problem.vars[i].upper);
    p[i] = std::clamp(p[i], cfg.p_min, problem.vars[i].upper);
  }
  ScaRun run;
  double f = problem.linear_objective(p);
  run.trace.push_back(f);
  run.best = f;
  run.powers = p;
  for (int s = 1; s <= cfg.max_sca_iters; ++s) {
    run.iterations = s;
    const CondensedProblem gp = condense(problem, p, cfg.p_min);
    for (int i = 0; i < n; ++i) z[i] = std::log(p[i]);
    const InnerResult inner = solve_condensed(gp, lo, hi, z, cfg);
    double change_db = 0.0;
    std::vector<double> next(n);
    for (int i = 0; i < n; ++i) {
      next[i] = std::clamp(std::exp(inner.z[i]), cfg.p_min, problem.vars[i].upper);
      change_db = std::max(change_db, std::abs(10.0 * std::log10(next[i] / p[i])));
    }
    const double f_next = problem.linear_objective(next);
    run.worst_drop = std::max(run.worst_drop, f - f_next);
    run.trace.push_back(f_next);
    p = std::move(next);
    f = f_next;
    if (f > run.best) {
      run.best = f;
      run.powers = p;
    }
    if (change_db < cfg.sca_tol_db) {
      run.converged = true;
      break;
    }
  }
  return run;
}

}  // namespace

SolverReport solve_signomial(const PowerProblem& problem, std::span<const double> start,
                             const SolverConfig& cfg) {
  cfg.validate();
  const int n = problem.size();
  if (static_cast<int>(start.size()) != n) throw std::invalid_argument("start size mismatch");
  SolverReport rep;
  if (n == 0) {
    rep.converged = true;
    rep.objective = problem.linear_objective({});
    rep.trace = {rep.objective};
    return rep;
  }

  auto absorb = [&](ScaRun&& run, bool primary) {
    ++rep.starts;
    rep.worst_trace_drop = std::max(rep.worst_trace_drop, run.worst_drop);
    if (primary || run.best > rep.objective) {
      rep.objective = run.best;
      rep.powers = std::move(run.powers);
      rep.trace = std::move(run.trace);
      rep.iterations = run.iterations;
      rep.converged = run.converged;
    }
  };
  absorb(run_sca(problem, {start.begin(), start.end()}, cfg), true);

  if (cfg.corners != CornerStarts::None && n <= cfg.max_corner_vars) {
    std::vector<double> corner(n);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      for (int i = 0; i < n; ++i) corner[i] = (mask >> i) & 1u ? cfg.p_min : problem.vars[i].upper;
      if (cfg.corners == CornerStarts::Screened &&
          problem.linear_objective(corner) <= rep.objective) {
        continue;
      }
      absorb(run_sca(problem, corner, cfg), false);
    }
  }
  rep.monotone = rep.worst_trace_drop <= 1e-6;
  return rep;
}

int snap_to_zero(const PowerProblem& problem, std::vector<double>& powers) {
  int switched = 0;
  double best = problem.exact_objective(powers);
  for (int i = 0; i < problem.size(); ++i) {
    if (powers[i] == 0.0) continue;
    const double keep = powers[i];
    powers[i] = 0.0;
    const double f = problem.exact_objective(powers);
    if (f > best) {
      best = f;
      ++switched;
    } else {
      powers[i] = keep;
    }
  }
  return switched;
}

PowerProblem restrict_problem(const PowerProblem& problem, std::span<const int> free,
                              std::span<const double> x) {
  std::vector<int> local(problem.size(), -1);
  PowerProblem sub;
  sub.rate_cap = problem.rate_cap;
  for (int v : free) {
    local.at(v) = sub.size();
    sub.vars.push_back(problem.vars[v]);
  }
  for (const auto& t : problem.terms) {
    bool involved = t.signal_var >= 0 && local[t.signal_var] >= 0;
    for (const auto& [v, a] : t.coupling) involved = involved || local[v] >= 0;
    if (!involved) continue;
    RateTerm r;
    r.weight = t.weight;
    r.noise = t.noise;
    if (t.signal_var < 0) {
      r.signal_const = t.signal_const;
    } else if (local[t.signal_var] >= 0) {
      r.signal_var = local[t.signal_var];
      r.signal_gain = t.signal_gain;
    } else {
      r.signal_const = t.signal_gain * x[t.signal_var];
    }
    for (const auto& [v, a] : t.coupling) {
      if (local[v] >= 0) r.coupling.emplace_back(local[v], a);
      else r.noise += a * x[v];
    }
    sub.terms.push_back(std::move(r));
  }
  return sub;
}

// --- brute-force oracle -------------------------------------------------------

namespace {

double oracle_value(const PowerProblem& problem, std::span<const double> p, OracleObjective obj) {
  return obj == OracleObjective::Linear ? problem.linear_objective(p) : problem.exact_objective(p);
}

std::vector<double> db_levels(double lo_w, double hi_w, double step_db) {
  std::vector<double> levels;
  const double span_db = 10.0 * std::log10(hi_w / lo_w);
  const int steps = static_cast<int>(std::floor(span_db / step_db + 1e-9));
  for (int k = 0; k <= steps; ++k) levels.push_back(hi_w * db_to_linear(-k * step_db));
  if (levels.back() > lo_w * (1.0 + 1e-12)) levels.push_back(lo_w);
  return levels;
}

struct Candidate {
  double value;
  std::vector<double> p;
};

// Exhaustive enumeration over the cartesian product of per-variable levels.
// Keeps the `keep` best points.
void enumerate_grid(const PowerProblem& problem, const std::vector<std::vector<double>>& levels,
                    OracleObjective obj, std::size_t keep, std::vector<Candidate>& best,
                    long long& evals) {
  const int n = problem.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> p(n);
  while (true) {
    for (int i = 0; i < n; ++i) p[i] = levels[i][idx[i]];
    const double v = oracle_value(problem, p, obj);
    ++evals;
    if (best.size() < keep || v > best.back().value) {
      auto pos = std::upper_bound(best.begin(), best.end(), v,
                                  [](double x, const Candidate& c) { return x > c.value; });
      best.insert(pos, {v, p});
      if (best.size() > keep) best.pop_back();
    }
    int i = 0;
    while (i < n && ++idx[i] == levels[i].size()) idx[i++] = 0;
    if (i == n) break;
  }
}

}  // namespace

OracleResult brute_force_power_oracle(const PowerProblem& problem, const OracleOptions& opt) {
  problem.validate();
  const int n = problem.size();
  if (n > opt.max_vars) throw std::invalid_argument("oracle refuses more than max_vars variables");
  if (!(opt.grid_db_step > 0.0)) throw std::invalid_argument("grid step must be > 0");

  OracleResult out;
  if (n == 0) {
    out.objective = oracle_value(problem, {}, opt.objective);
    return out;
  }
  std::vector<std::vector<double>> levels(n);
  for (int i = 0; i < n; ++i) {
    levels[i] = db_levels(std::min(opt.floor_watts, problem.vars[i].upper), problem.vars[i].upper,
                          opt.grid_db_step);
  }
  std::vector<Candidate> best;
  const std::size_t keep = opt.refine ? static_cast<std::size_t>(std::max(1, opt.refine_seeds)) * 32 : 1;
  enumerate_grid(problem, levels, opt.objective, keep, best, out.evaluations);
  out.powers = best.front().p;
  out.objective = best.front().value;
  if (!opt.refine) return out;

  // Seeds: best grid points that are not within two coarse steps of a seed
  // already chosen, so distinct basins each get refined.
  std::vector<Candidate> seeds;
  for (const auto& c : best) {
    bool near = false;
    for (const auto& s : seeds) {
      double d = 0.0;
      for (int i = 0; i < n; ++i) d = std::max(d, std::abs(10.0 * std::log10(c.p[i] / s.p[i])));
      near = near || d <= 2.0 * opt.grid_db_step + 1e-9;
    }
    if (!near) seeds.push_back(c);
    if (static_cast<int>(seeds.size()) >= opt.refine_seeds) break;
  }

  for (const auto& seed : seeds) {
    // Finer local grid within one coarse step of the seed.
    std::vector<std::vector<double>> local(n);
    for (int i = 0; i < n; ++i) {
      const double ub = problem.vars[i].upper;
      const double lb = std::min(opt.floor_watts, ub);
      const double hi = std::min(ub, seed.p[i] * db_to_linear(opt.grid_db_step));
      const double lo = std::max(lb, seed.p[i] * db_to_linear(-opt.grid_db_step));
      local[i] = db_levels(lo, hi, std::min(opt.refine_grid_db_step, opt.grid_db_step));
    }
    std::vector<Candidate> top;
    enumerate_grid(problem, local, opt.objective, 1, top, out.evaluations);
    Candidate cur = top.front();

    // Pattern search in dB coordinates.
    for (double step = opt.refine_grid_db_step / 2.0; step >= opt.refine_min_step_db; step /= 2.0) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (int i = 0; i < n; ++i) {
          for (double sgn : {1.0, -1.0}) {
            std::vector<double> q = cur.p;
            const double lb = std::min(opt.floor_watts, problem.vars[i].upper);
            q[i] = std::clamp(q[i] * db_to_linear(sgn * step), lb, problem.vars[i].upper);
            const double v = oracle_value(problem, q, opt.objective);
            ++out.evaluations;
            if (v > cur.value + 1e-15 * std::abs(cur.value)) {
              cur = {v, std::move(q)};
              moved = true;
            }
          }
        }
      }
    }
    if (cur.value > out.objective) {
      out.objective = cur.value;
      out.powers = cur.p;
    }
  }
  return out;
}

// --- JSON ---------------------------------------------------------------------

nlohmann::json to_json(const PowerProblem& problem) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : problem.vars) vars.push_back({{"tag", v.tag}, {"upper_w", v.upper}});
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : problem.terms) {
    nlohmann::json coupling = nlohmann::json::array();
    for (const auto& [v, a] : t.coupling) coupling.push_back({v, a});
    terms.push_back({{"weight", t.weight},
                     {"signal_var", t.signal_var},
                     {"signal_gain", t.signal_gain},
                     {"signal_const_w", t.signal_const},
                     {"noise_w", t.noise},
                     {"coupling", coupling}});
  }
  return {{"vars", vars},
          {"terms", terms},
          {"rate_cap", std::isinf(problem.rate_cap) ? nlohmann::json(nullptr)
                                                    : nlohmann::json(problem.rate_cap)}};
}

PowerProblem power_problem_from_json(const nlohmann::json& j) {
  PowerProblem p;
  for (const auto& v : j.at("vars")) p.vars.push_back({v.at("tag").get<int>(), v.at("upper_w").get<double>()});
  for (const auto& t : j.at("terms")) {
    RateTerm r;
    r.weight = t.at("weight");
    r.signal_var = t.at("signal_var");
    r.signal_gain = t.at("signal_gain");
    r.signal_const = t.at("signal_const_w");
    r.noise = t.at("noise_w");
    for (const auto& c : t.at("coupling")) r.coupling.emplace_back(c.at(0).get<int>(), c.at(1).get<double>());
    p.terms.push_back(std::move(r));
  }
  const auto& cap = j.at("rate_cap");
  p.rate_cap = cap.is_null() ? kInf : cap.get<double>();
  p.validate();
  return p;
}

}  // namespace fdmr
