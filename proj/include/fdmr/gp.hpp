#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fdmr/common.hpp"

namespace fdmr {

struct PowerVariable {
  int tag = 0;          // caller-defined identity (e.g. 2*cell + direction)
  double upper = 0.0;   // watts
};

/// One weighted rate term w * log2(1 + S / D) where
///   S = signal_gain * p[signal_var]  (or signal_const when signal_var < 0)
///   D = noise + sum(coupling gain * p[var]).
struct RateTerm {
  double weight = 0.0;
  int signal_var = -1;
  double signal_gain = 0.0;
  double signal_const = 0.0;
  double noise = 0.0;
  std::vector<std::pair<int, double>> coupling;
};

/// Box-constrained weighted sum-rate power problem. Maximization form.
struct PowerProblem {
  std::vector<PowerVariable> vars;
  std::vector<RateTerm> terms;
  double rate_cap = kInf;  // applied by exact_objective only

  int size() const { return static_cast<int>(vars.size()); }
  void validate() const;

  double sinr(const RateTerm& t, std::span<const double> p) const;
  /// sum w log2(1 + SINR): the form the geometric programs optimize.
  double linear_objective(std::span<const double> p) const;
  /// sum ln(1 + w min(cap, log2(1 + SINR))): the proportional-fair increment.
  double exact_objective(std::span<const double> p) const;
};

enum class CornerStarts { None, Screened, All };

struct SolverConfig {
  double sca_tol_db = 1e-3;
  double inner_tol = 1e-6;
  int max_sca_iters = 25;
  int max_inner_iters = 60;
  double p_min = dbm_to_watts(-40.0);
  /// Extra SCA starts at the box corners. Screened only launches from corners
  /// whose objective beats the warm-start result.
  CornerStarts corners = CornerStarts::Screened;
  int max_corner_vars = 4;
  void validate() const;
};

struct SolverReport {
  std::vector<double> powers;
  std::vector<double> trace;  // linear objective per SCA iterate, start first
  int iterations = 0;
  int starts = 0;
  bool converged = false;
  double objective = 0.0;     // linear objective at `powers`
  bool monotone = true;       // every launched trace was nondecreasing
  double worst_trace_drop = 0.0;
};

/// Geometric program produced by condensing every numerator posynomial at an
/// anchor point. In log variables z = ln p the value to minimize is
///   sum_k w_k/ln2 * lse_k(z) - (affine_const + affine . z),
/// a convex function.
struct CondensedProblem {
  struct LseTerm {
    double weight = 0.0;  // w / ln 2
    double constant = 0.0;
    std::vector<std::pair<int, double>> coupling;
  };
  int n = 0;
  std::vector<LseTerm> lse;
  Eigen::VectorXd affine;
  double affine_const = 0.0;

  double value(const Eigen::VectorXd& z) const;
  /// Value, gradient and Hessian in one pass.
  double evaluate(const Eigen::VectorXd& z, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;
  /// Surrogate of linear_objective at powers p (maximization form, <= true).
  double surrogate_objective(std::span<const double> p) const;
};

/// AM-GM condensation at `anchor`. Anchor entries must be positive; entries
/// at or below zero are nudged to `p_min` and counted in `nudged`.
CondensedProblem condense(const PowerProblem& problem, std::span<const double> anchor,
                          double p_min = dbm_to_watts(-40.0), int* nudged = nullptr);

struct InnerResult {
  Eigen::VectorXd z;
  int iterations = 0;
  bool converged = false;
};

/// Projected Newton with Armijo backtracking on lo <= z <= hi, starting at z0.
/// Every accepted step strictly decreases the condensed value.
InnerResult solve_condensed(const CondensedProblem& gp, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, const Eigen::VectorXd& z0,
                            const SolverConfig& cfg);

/// Successive condensation from `start` (clamped into the box), plus corner
/// starts per the config. Returns the best iterate found.
SolverReport solve_signomial(const PowerProblem& problem, std::span<const double> start,
                             const SolverConfig& cfg = {});

/// Sets variables to exactly 0 one at a time when that raises the exact
/// objective. Returns the number of variables switched off.
int snap_to_zero(const PowerProblem& problem, std::vector<double>& powers);

/// Subproblem in the variables `free` (in that order) with every other
/// variable fixed at x. Terms that do not involve a free variable are dropped.
PowerProblem restrict_problem(const PowerProblem& problem, std::span<const int> free,
                              std::span<const double> x);

enum class OracleObjective { Linear, Exact };

struct OracleOptions {
  double grid_db_step = 1.0;
  double floor_watts = dbm_to_watts(-40.0);
  OracleObjective objective = OracleObjective::Linear;
  /// Local refinement: finer grid windows around the best coarse points,
  /// then pattern search down to `refine_min_step_db`.
  bool refine = true;
  double refine_grid_db_step = 0.25;
  int refine_seeds = 12;
  double refine_min_step_db = 1e-4;
  int max_vars = 4;
};

struct OracleResult {
  std::vector<double> powers;
  double objective = 0.0;
  long long evaluations = 0;
};

/// Exhaustive dB-grid search over [floor, upper] per variable. Refuses
/// problems with more than `max_vars` variables.
OracleResult brute_force_power_oracle(const PowerProblem& problem, const OracleOptions& opt = {});

nlohmann::json to_json(const PowerProblem& problem);
PowerProblem power_problem_from_json(const nlohmann::json& j);

}  // namespace fdmr
