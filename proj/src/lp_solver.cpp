#include "benders_atoms/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "benders_atoms/errors.hpp"

namespace benders_atoms {

void LinearProgram::validate() const {
  const Eigen::Index n = objective.size();
  const Eigen::Index m = rhs.size();
  if (constraints.rows() != m || constraints.cols() != n) {
    std::ostringstream os;
    os << "constraint matrix is " << constraints.rows() << "x" << constraints.cols() << ", expected " << m
       << "x" << n;
    throw DimensionError(os.str());
  }
  if (static_cast<Eigen::Index>(row_senses.size()) != m) throw DimensionError("one row sense per row required");
  if (lower.size() != n || upper.size() != n) throw DimensionError("bounds must have one entry per column");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInf ||
        upper[j] == -kInf) {
      throw DimensionError("invalid bounds on column " + std::to_string(j));
    }
  }
  if (!objective.allFinite() || !constraints.allFinite() || !rhs.allFinite()) {
    throw DimensionError("LP data must be finite");
  }
}

namespace {

// x_j = offset + sign * x'[pos] - x'[neg]   (neg < 0 when the variable is not free)
struct ColumnMap {
  double offset = 0.0;
  double sign = 1.0;
  int pos = -1;
  int neg = -1;
};

class SimplexEngine {
 public:
  SimplexEngine(const LinearProgram& lp, const LpTolerances& tol) : lp_(lp), tol_(tol) { build(); }

  LpResult run() {
    LpResult result;
    const int cap = 50 * (rows_ + work_cols_) + 1000;

    // Phase 1: drive the artificials to zero.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(work_cols_);
    for (int j = 0; j < work_cols_; ++j) {
      if (artificial_[j]) phase1[j] = 1.0;
    }
    if (any_artificial_) {
      int entering = -1;
      iterate(phase1, /*allow_artificial=*/true, cap, entering);
      double infeasibility = 0.0;
      for (int i = 0; i < rows_; ++i) {
        if (artificial_[basis_[i]]) infeasibility += beta_[i];
      }
      const double scale = std::max(1.0, rhs_scale_);
      if (infeasibility > tol_.phase_one * scale) {
        result.status = LpStatus::Infeasible;
        const Eigen::VectorXd y = multipliers(phase1);
        result.ray = Eigen::VectorXd::Zero(lp_.rows());
        for (int i = 0; i < lp_.rows(); ++i) result.ray[i] = -row_flip_[i] * y[i];
        result.iterations = iterations_;
        return result;
      }
      drive_out_artificials();
    }

    // Phase 2 on the min-form objective.
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(work_cols_);
    const double to_min = lp_.sense == Sense::Max ? -1.0 : 1.0;
    for (int j = 0; j < lp_.cols(); ++j) {
      const auto& cm = cmap_[j];
      phase2[cm.pos] += to_min * lp_.objective[j] * cm.sign;
      if (cm.neg >= 0) phase2[cm.neg] -= to_min * lp_.objective[j];
    }
    int entering = -1;
    if (!iterate(phase2, /*allow_artificial=*/false, cap, entering)) {
      result.status = LpStatus::Unbounded;
      Eigen::VectorXd d = Eigen::VectorXd::Zero(work_cols_);
      d[entering] = 1.0;
      for (int i = 0; i < rows_; ++i) d[basis_[i]] = -T_(i, entering);
      result.ray = to_original(d, /*with_offset=*/false);
      result.iterations = iterations_;
      return result;
    }

    result.status = LpStatus::Optimal;
    Eigen::VectorXd xs = Eigen::VectorXd::Zero(work_cols_);
    for (int i = 0; i < rows_; ++i) xs[basis_[i]] = std::max(0.0, beta_[i]);
    result.primal = to_original(xs, /*with_offset=*/true);
    result.objective = lp_.objective.dot(result.primal);

    const Eigen::VectorXd y = multipliers(phase2);
    result.duals = Eigen::VectorXd::Zero(lp_.rows());
    for (int i = 0; i < lp_.rows(); ++i) result.duals[i] = to_min * row_flip_[i] * y[i];
    result.reduced_costs = lp_.objective - lp_.constraints.transpose() * result.duals;
    for (int i = 0; i < rows_; ++i) {
      const int col = basis_[i];
      if (col < structural_cols_) result.basis.push_back(owner_[col]);
    }
    std::sort(result.basis.begin(), result.basis.end());
    result.iterations = iterations_;
    return result;
  }

 private:
  void build() {
    const int m = lp_.rows();
    const int n = lp_.cols();

    // Columns for the shifted / mirrored / split variables.
    cmap_.resize(n);
    int col = 0;
    std::vector<int> bounded;  // original columns needing an upper-bound row
    for (int j = 0; j < n; ++j) {
      const double lo = lp_.lower[j], hi = lp_.upper[j];
      ColumnMap cm;
      if (std::isfinite(lo)) {
        cm.offset = lo;
        cm.pos = col++;
        if (std::isfinite(hi)) bounded.push_back(j);
      } else if (std::isfinite(hi)) {
        cm.offset = hi;
        cm.sign = -1.0;
        cm.pos = col++;
      } else {
        cm.pos = col++;
        cm.neg = col++;
      }
      cmap_[j] = cm;
    }
    structural_cols_ = col;
    owner_.assign(structural_cols_, -1);
    for (int j = 0; j < n; ++j) {
      owner_[cmap_[j].pos] = j;
      if (cmap_[j].neg >= 0) owner_[cmap_[j].neg] = j;
    }

    rows_ = m + static_cast<int>(bounded.size());
    Eigen::MatrixXd Arows = Eigen::MatrixXd::Zero(rows_, structural_cols_);
    Eigen::VectorXd b(rows_);
    std::vector<RowSense> senses(rows_);
    for (int i = 0; i < m; ++i) {
      double shift = 0.0;
      for (int j = 0; j < n; ++j) {
        const double a = lp_.constraints(i, j);
        if (a == 0.0) continue;
        const auto& cm = cmap_[j];
        Arows(i, cm.pos) += a * cm.sign;
        if (cm.neg >= 0) Arows(i, cm.neg) -= a;
        shift += a * cm.offset;
      }
      b[i] = lp_.rhs[i] - shift;
      senses[i] = lp_.row_senses[i];
    }
    for (std::size_t k = 0; k < bounded.size(); ++k) {
      const int j = bounded[k];
      const int i = m + static_cast<int>(k);
      Arows(i, cmap_[j].pos) = 1.0;
      b[i] = lp_.upper[j] - lp_.lower[j];
      senses[i] = RowSense::LE;
    }

    // Slack / surplus columns, sign flips, artificials.
    int slack_cols = 0;
    for (auto s : senses) slack_cols += (s == RowSense::EQ) ? 0 : 1;
    std::vector<int> slack_of(rows_, -1);
    row_flip_.assign(rows_, 1.0);
    std::vector<bool> needs_artificial(rows_, false);
    int next = structural_cols_;
    for (int i = 0; i < rows_; ++i) {
      if (senses[i] != RowSense::EQ) slack_of[i] = next++;
    }
    int artificial_count = 0;
    for (int i = 0; i < rows_; ++i) {
      if (b[i] < 0.0) row_flip_[i] = -1.0;
      // The slack is a usable unit column when it ends up with +1 after the flip.
      const double slack_coef = senses[i] == RowSense::LE ? 1.0 : (senses[i] == RowSense::GE ? -1.0 : 0.0);
      needs_artificial[i] = !(slack_of[i] >= 0 && slack_coef * row_flip_[i] > 0.0);
      if (needs_artificial[i]) ++artificial_count;
    }
    work_cols_ = structural_cols_ + slack_cols + artificial_count;
    any_artificial_ = artificial_count > 0;
    artificial_.assign(work_cols_, false);

    T_ = Eigen::MatrixXd::Zero(rows_, work_cols_ + rows_);
    beta_.resize(rows_);
    basis_.assign(rows_, -1);
    int art = structural_cols_ + slack_cols;
    rhs_scale_ = 0.0;
    for (int i = 0; i < rows_; ++i) {
      const double f = row_flip_[i];
      T_.block(i, 0, 1, structural_cols_) = f * Arows.row(i);
      if (slack_of[i] >= 0) {
        const double slack_coef = senses[i] == RowSense::LE ? 1.0 : -1.0;
        T_(i, slack_of[i]) = f * slack_coef;
      }
      beta_[i] = f * b[i];
      rhs_scale_ = std::max(rhs_scale_, std::abs(beta_[i]));
      if (needs_artificial[i]) {
        T_(i, art) = 1.0;
        artificial_[art] = true;
        basis_[i] = art++;
      } else {
        basis_[i] = slack_of[i];
      }
      T_(i, work_cols_ + i) = 1.0;  // tracks B^-1
    }
  }

  // y' = c_B' B^-1 over the tableau rows.
  Eigen::VectorXd multipliers(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd cb(rows_);
    for (int i = 0; i < rows_; ++i) cb[i] = cost[basis_[i]];
    return T_.rightCols(rows_).transpose() * cb;
  }

  void pivot(int r, int q) {
    const double piv = T_(r, q);
    T_.row(r) /= piv;
    beta_[r] /= piv;
    T_(r, q) = 1.0;
    for (int i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = T_(i, q);
      if (f == 0.0) continue;
      T_.row(i) -= f * T_.row(r);
      beta_[i] -= f * beta_[r];
      T_(i, q) = 0.0;
      if (std::abs(beta_[i]) < 1e-13) beta_[i] = 0.0;
    }
    basis_[r] = q;
    ++iterations_;
  }

  // Returns false when the LP is unbounded along column `entering`.
  bool iterate(const Eigen::VectorXd& cost, bool allow_artificial, int cap, int& entering) {
    bool bland = false;
    int degenerate_run = 0;
    const int degenerate_limit = 5 * (rows_ + work_cols_);
    std::vector<bool> in_basis(work_cols_, false);
    for (;;) {
      if (iterations_ > cap) throw NumericalError("simplex iteration cap reached");
      std::fill(in_basis.begin(), in_basis.end(), false);
      for (int i = 0; i < rows_; ++i) in_basis[basis_[i]] = true;
      Eigen::VectorXd cb(rows_);
      for (int i = 0; i < rows_; ++i) cb[i] = cost[basis_[i]];

      int q = -1;
      double best = -tol_.optimality;
      for (int j = 0; j < work_cols_; ++j) {
        if (in_basis[j] || (artificial_[j] && !allow_artificial)) continue;
        const double d = cost[j] - cb.dot(T_.col(j).head(rows_));
        if (d < best) {
          q = j;
          best = d;
          if (bland) break;
        }
      }
      if (q < 0) return true;

      int r = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < rows_; ++i) {
        const double a = T_(i, q);
        if (a <= tol_.pivot) continue;
        const double ratio = std::max(0.0, beta_[i]) / a;
        if (r < 0 || ratio < best_ratio - 1e-12 * (1.0 + best_ratio) ||
            (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio) && basis_[i] < basis_[r])) {
          r = i;
          best_ratio = ratio;
        }
      }
      if (r < 0) {
        entering = q;
        return false;
      }
      if (best_ratio <= 1e-12) {
        if (++degenerate_run > degenerate_limit) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(r, q);
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < rows_; ++i) {
      if (!artificial_[basis_[i]]) continue;
      beta_[i] = 0.0;
      int q = -1;
      double best = 1e-9;
      for (int j = 0; j < work_cols_; ++j) {
        if (artificial_[j]) continue;
        if (std::abs(T_(i, j)) > best) {
          best = std::abs(T_(i, j));
          q = j;
        }
      }
      if (q >= 0) pivot(i, q);  // otherwise the row is redundant and the artificial stays at zero
    }
  }

  Eigen::VectorXd to_original(const Eigen::VectorXd& xs, bool with_offset) const {
    Eigen::VectorXd x(lp_.cols());
    for (int j = 0; j < lp_.cols(); ++j) {
      const auto& cm = cmap_[j];
      double v = (with_offset ? cm.offset : 0.0) + cm.sign * xs[cm.pos];
      if (cm.neg >= 0) v -= xs[cm.neg];
      x[j] = v;
    }
    return x;
  }

  const LinearProgram& lp_;
  LpTolerances tol_;
  std::vector<ColumnMap> cmap_;
  std::vector<int> owner_;
  std::vector<double> row_flip_;
  std::vector<bool> artificial_;
  bool any_artificial_ = false;
  int rows_ = 0;
  int structural_cols_ = 0;
  int work_cols_ = 0;
  double rhs_scale_ = 0.0;
  Eigen::MatrixXd T_;
  Eigen::VectorXd beta_;
  std::vector<int> basis_;
  int iterations_ = 0;
};

// Contribution of reduced cost d_j to the dual objective given the column's box.
double bound_term(Sense sense, double d, double lo, double hi) {
  if (d == 0.0) return 0.0;
  // Max: the Lagrangian sup over the box of d x; Min: the inf.
  const bool take_upper = (sense == Sense::Max) == (d > 0.0);
  return d * (take_upper ? hi : lo);
}

}  // namespace

LpResult solve(const LinearProgram& lp, const LpTolerances& tol) {
  lp.validate();
  SimplexEngine engine(lp, tol);
  return engine.run();
}

double primal_residual(const LinearProgram& lp, const Eigen::VectorXd& x) {
  double worst = 0.0;
  if (lp.rows() > 0) {
    const Eigen::VectorXd ax = lp.constraints * x;
    for (int i = 0; i < lp.rows(); ++i) {
      const double diff = ax[i] - lp.rhs[i];
      switch (lp.row_senses[i]) {
        case RowSense::LE:
          worst = std::max(worst, diff);
          break;
        case RowSense::GE:
          worst = std::max(worst, -diff);
          break;
        case RowSense::EQ:
          worst = std::max(worst, std::abs(diff));
          break;
      }
    }
  }
  for (int j = 0; j < lp.cols(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  return worst;
}

double dual_residual(const LinearProgram& lp, const Eigen::VectorXd& duals) {
  double worst = 0.0;
  const bool is_max = lp.sense == Sense::Max;
  for (int i = 0; i < lp.rows(); ++i) {
    // Shadow prices: Max -> LE >= 0, GE <= 0; Min -> LE <= 0, GE >= 0.
    const double y = duals[i];
    if (lp.row_senses[i] == RowSense::LE) worst = std::max(worst, is_max ? -y : y);
    if (lp.row_senses[i] == RowSense::GE) worst = std::max(worst, is_max ? y : -y);
  }
  const Eigen::VectorXd d = lp.objective - lp.constraints.transpose() * duals;
  for (int j = 0; j < lp.cols(); ++j) {
    // A reduced cost pushing towards an infinite bound is a dual infeasibility.
    const bool wants_up = is_max ? d[j] > 0.0 : d[j] < 0.0;
    if (wants_up && !std::isfinite(lp.upper[j])) worst = std::max(worst, std::abs(d[j]));
    if (!wants_up && d[j] != 0.0 && !std::isfinite(lp.lower[j])) worst = std::max(worst, std::abs(d[j]));
  }
  return worst;
}

double dual_objective(const LinearProgram& lp, const Eigen::VectorXd& duals) {
  double value = lp.rhs.dot(duals);
  const Eigen::VectorXd d = lp.objective - lp.constraints.transpose() * duals;
  for (int j = 0; j < lp.cols(); ++j) {
    const double dj = std::abs(d[j]) < 1e-12 ? 0.0 : d[j];
    value += bound_term(lp.sense, dj, lp.lower[j], lp.upper[j]);
  }
  return value;
}

double farkas_margin(const LinearProgram& lp, const Eigen::VectorXd& ray) {
  for (int i = 0; i < lp.rows(); ++i) {
    if (lp.row_senses[i] == RowSense::LE && ray[i] < -1e-12) return -kInf;
    if (lp.row_senses[i] == RowSense::GE && ray[i] > 1e-12) return -kInf;
  }
  const Eigen::VectorXd combo = lp.constraints.transpose() * ray;
  double min_lhs = 0.0;
  for (int j = 0; j < lp.cols(); ++j) {
    const double a = std::abs(combo[j]) < 1e-12 ? 0.0 : combo[j];
    if (a == 0.0) continue;
    const double bound = a > 0.0 ? lp.lower[j] : lp.upper[j];
    if (!std::isfinite(bound)) return -kInf;
    min_lhs += a * bound;
  }
  return min_lhs - lp.rhs.dot(ray);
}

double ray_improvement(const LinearProgram& lp, const Eigen::VectorXd& d, double tol) {
  if (lp.rows() > 0) {
    const Eigen::VectorXd ad = lp.constraints * d;
    for (int i = 0; i < lp.rows(); ++i) {
      if (lp.row_senses[i] == RowSense::LE && ad[i] > tol) return -kInf;
      if (lp.row_senses[i] == RowSense::GE && ad[i] < -tol) return -kInf;
      if (lp.row_senses[i] == RowSense::EQ && std::abs(ad[i]) > tol) return -kInf;
    }
  }
  for (int j = 0; j < lp.cols(); ++j) {
    if (d[j] > tol && std::isfinite(lp.upper[j])) return -kInf;
    if (d[j] < -tol && std::isfinite(lp.lower[j])) return -kInf;
  }
  const double rate = lp.objective.dot(d);
  return lp.sense == Sense::Max ? rate : -rate;
}

namespace {

// min (b - A x0)'mu  s.t.  G'mu >= h,  (b - A x_hat)'mu <= f,  mu >= 0
Eigen::VectorXd pareto_multipliers(const OriginalProblem& op, const Eigen::VectorXd& slack, double f,
                                   const Eigen::VectorXd& fallback) {
  const int m = op.m1(), p = op.p();
  const Eigen::VectorXd core = Eigen::VectorXd::Constant(op.n(), 0.5);
  LinearProgram lp;
  lp.sense = Sense::Min;
  lp.objective = op.b - op.A * core;
  lp.constraints.resize(p + 1, m);
  lp.constraints.topRows(p) = op.G.transpose();
  lp.constraints.row(p) = slack.transpose();
  lp.rhs.resize(p + 1);
  lp.rhs.head(p) = op.h;
  lp.rhs[p] = f + 1e-9 * (1.0 + std::abs(f));
  lp.row_senses.assign(static_cast<std::size_t>(p), RowSense::GE);
  lp.row_senses.push_back(RowSense::LE);
  lp.lower = Eigen::VectorXd::Zero(m);
  lp.upper = Eigen::VectorXd::Constant(m, kInf);
  try {
    const LpResult res = solve(lp);
    if (res.status == LpStatus::Optimal) return res.primal;
  } catch (const NumericalError&) {
  }
  return fallback;
}

}  // namespace

SubproblemOutcome solve_subproblem(const OriginalProblem& op, const Bits& x_hat, bool pareto_duals) {
  if (static_cast<int>(x_hat.size()) != op.n()) throw DimensionError("x_hat must have length n");
  LinearProgram lp;
  lp.sense = Sense::Max;
  lp.objective = op.h;
  lp.constraints = op.G;
  lp.rhs = op.b - op.A * to_vector(x_hat);
  lp.row_senses.assign(static_cast<std::size_t>(op.m1()), RowSense::LE);
  lp.lower = Eigen::VectorXd::Zero(op.p());
  lp.upper = Eigen::VectorXd::Constant(op.p(), kInf);

  const LpResult res = solve(lp);
  SubproblemOutcome out;
  out.status = res.status;
  if (res.status == LpStatus::Optimal) {
    out.y = res.primal.cwiseMax(0.0);
    out.value = op.h.dot(out.y);
    out.mu = res.duals.cwiseMax(0.0);
    if (pareto_duals && op.m1() > 0) out.mu = pareto_multipliers(op, lp.rhs, out.value, out.mu).cwiseMax(0.0);
    for (Eigen::Index i = 0; i < out.mu.size(); ++i) {
      if (out.mu[i] < 1e-12) out.mu[i] = 0.0;
    }
  } else if (res.status == LpStatus::Infeasible) {
    Eigen::VectorXd r = res.ray.cwiseMax(0.0);
    const double scale = r.size() > 0 ? r.maxCoeff() : 0.0;
    if (scale > 0.0) r /= scale;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      if (r[i] < 1e-12) r[i] = 0.0;
    }
    out.ray = r;
  }
  return out;
}

namespace {

LinearProgram relaxation(const OriginalProblem& op, RelaxationRows rows) {
  const int n = op.n(), p = op.p();
  const int m = (rows.linking ? op.m1() : 0) + (rows.master ? op.m2() : 0);
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(n + p);
  lp.constraints = Eigen::MatrixXd::Zero(m, n + p);
  lp.rhs = Eigen::VectorXd::Zero(m);
  lp.row_senses.assign(static_cast<std::size_t>(m), RowSense::LE);
  int r = 0;
  if (rows.linking) {
    for (int i = 0; i < op.m1(); ++i, ++r) {
      lp.constraints.block(r, 0, 1, n) = op.A.row(i);
      lp.constraints.block(r, n, 1, p) = op.G.row(i);
      lp.rhs[r] = op.b[i];
    }
  }
  if (rows.master) {
    for (int i = 0; i < op.m2(); ++i, ++r) {
      lp.constraints.block(r, 0, 1, n) = op.B.row(i);
      lp.rhs[r] = op.b_prime[i];
    }
  }
  lp.lower = Eigen::VectorXd::Zero(n + p);
  lp.upper.resize(n + p);
  lp.upper.head(n).setOnes();
  lp.upper.tail(p).setConstant(kInf);
  return lp;
}

double solve_relaxation(const LinearProgram& lp, const char* what) {
  const LpResult res = solve(lp);
  if (res.status == LpStatus::Infeasible) throw RelaxationInfeasible(std::string(what) + ": relaxation is infeasible");
  if (res.status == LpStatus::Unbounded) throw RelaxationUnbounded(std::string(what) + ": relaxation is unbounded");
  return res.objective;
}

}  // namespace

double phi_max_bound(const OriginalProblem& op, RelaxationRows rows) {
  op.validate();
  LinearProgram lp = relaxation(op, rows);
  lp.sense = Sense::Max;
  lp.objective.tail(op.p()) = op.h;
  return solve_relaxation(lp, "phi upper bound");
}

double phi_min_bound(const OriginalProblem& op, RelaxationRows rows) {
  op.validate();
  LinearProgram lp = relaxation(op, rows);
  lp.sense = Sense::Min;
  lp.objective.tail(op.p()) = op.h;
  return solve_relaxation(lp, "phi lower bound");
}

double slack_max_bound(const OriginalProblem& op, int k, RelaxationRows rows) {
  op.validate();
  if (k < 0 || k >= op.m2()) throw DimensionError("master row index out of range");
  LinearProgram lp = relaxation(op, rows);
  lp.sense = Sense::Max;
  lp.objective.head(op.n()) = -op.B.row(k).transpose();
  return op.b_prime[k] + solve_relaxation(lp, "master slack bound");
}

}  // namespace benders_atoms
