#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "benders_atoms/milp_model.hpp"
#include "benders_atoms/types.hpp"

namespace benders_atoms {

enum class Sense { Max, Min };
enum class RowSense { LE, GE, EQ };
enum class LpStatus { Optimal, Infeasible, Unbounded };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearProgram {
  Sense sense = Sense::Max;
  Eigen::VectorXd objective;    // cols
  Eigen::MatrixXd constraints;  // rows x cols
  Eigen::VectorXd rhs;          // rows
  std::vector<RowSense> row_senses;
  Eigen::VectorXd lower;  // may hold -inf
  Eigen::VectorXd upper;  // may hold +inf

  int rows() const { return static_cast<int>(rhs.size()); }
  int cols() const { return static_cast<int>(objective.size()); }

  /// Throws DimensionError for inconsistent shapes or lower > upper.
  void validate() const;
};

/// Optimal: primal, duals (shadow prices d objective / d rhs), reduced costs, objective.
/// Infeasible: ray holds row multipliers forming a Farkas certificate
///   (ray_i >= 0 on LE rows, <= 0 on GE rows), see farkas_margin().
/// Unbounded: ray holds an improving recession direction over the columns.
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd primal;
  Eigen::VectorXd duals;
  Eigen::VectorXd reduced_costs;
  double objective = 0.0;
  Eigen::VectorXd ray;
  std::vector<int> basis;  // basic structural columns (original indices), for the vertex check
  int iterations = 0;
};

struct LpTolerances {
  double feasibility = 1e-7;
  double optimality = 1e-9;
  double pivot = 1e-10;
  double phase_one = 1e-9;
};

/// Dense two-phase primal simplex. Dantzig pricing with lowest-index ties;
/// switches to Bland's rule after 5 * (rows + cols) consecutive degenerate pivots.
/// Throws NumericalError when the iteration cap is hit.
LpResult solve(const LinearProgram& lp, const LpTolerances& tol = {});

// Certificate checks, independent of the solver internals.

/// max(row violation, bound violation) of x.
double primal_residual(const LinearProgram& lp, const Eigen::VectorXd& x);
/// Largest sign violation of the dual pair (duals, c - A' duals) for the given LP.
double dual_residual(const LinearProgram& lp, const Eigen::VectorXd& duals);
/// Lagrangian dual objective rhs'y + sum of bound terms of the reduced costs.
double dual_objective(const LinearProgram& lp, const Eigen::VectorXd& duals);
/// min over the box of (r'A) x  minus  r'rhs. Positive (with r sign-feasible) proves infeasibility.
double farkas_margin(const LinearProgram& lp, const Eigen::VectorXd& ray);
/// Objective improvement rate of direction d, or -inf if d is not a recession direction.
double ray_improvement(const LinearProgram& lp, const Eigen::VectorXd& d, double tol = 1e-9);

/// Outcome of max h'y s.t. G y <= b - A x_hat, y >= 0.
struct SubproblemOutcome {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd y;
  double value = 0.0;   // f(x_hat) = h'y*
  Eigen::VectorXd mu;   // duals of the linking rows, >= 0
  Eigen::VectorXd ray;  // extreme ray of the dual: r >= 0, G'r >= 0, r'(b - A x_hat) < 0
};

/// With pareto_duals set, mu is chosen among the optimal dual vertices so that the cut value at
/// the core point x = 1/2 is smallest (Magnanti-Wong). Such cuts are never dominated.
SubproblemOutcome solve_subproblem(const OriginalProblem& op, const Bits& x_hat, bool pareto_duals = true);

/// Rows kept in the continuous relaxation used for bounds.
struct RelaxationRows {
  bool linking = true;
  bool master = true;
};

/// max h'y over the relaxation with x in [0,1]^n. Throws RelaxationInfeasible / RelaxationUnbounded.
double phi_max_bound(const OriginalProblem& op, RelaxationRows rows = {});
/// min h'y over the same relaxation; a lower bound on the master surrogate.
double phi_min_bound(const OriginalProblem& op, RelaxationRows rows = {});
/// max b'_k - B_k x over the relaxation (k is zero-based).
double slack_max_bound(const OriginalProblem& op, int k, RelaxationRows rows = {});

}  // namespace benders_atoms
