#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "benders_atoms/lp_solver.hpp"

namespace lp_oracle {

using benders_atoms::LinearProgram;
using benders_atoms::RowSense;
using benders_atoms::Sense;

/// Best objective over all vertices of the feasible set, or nullopt when no vertex is feasible.
/// Only meaningful for pointed polyhedra (every column has a finite lower bound).
inline std::optional<double> best_vertex(const LinearProgram& lp) {
  const int n = lp.cols();
  std::vector<Eigen::VectorXd> normals;
  std::vector<double> levels;
  for (int i = 0; i < lp.rows(); ++i) {
    normals.emplace_back(lp.constraints.row(i).transpose());
    levels.push_back(lp.rhs[i]);
  }
  for (int j = 0; j < n; ++j) {
    for (double bound : {lp.lower[j], lp.upper[j]}) {
      if (!std::isfinite(bound)) continue;
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[j] = 1.0;
      normals.push_back(e);
      levels.push_back(bound);
    }
  }
  const int k = static_cast<int>(normals.size());
  std::optional<double> best;
  if (n == 0) return 0.0;
  if (k < n) return best;
  std::vector<int> pick(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pick[i] = i;
  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd rhs(n);
  for (;;) {
    for (int r = 0; r < n; ++r) {
      M.row(r) = normals[pick[r]].transpose();
      rhs[r] = levels[pick[r]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rank() == n) {
      const Eigen::VectorXd x = lu.solve(rhs);
      if (benders_atoms::primal_residual(lp, x) <= 1e-7) {
        const double v = lp.objective.dot(x);
        if (!best || (lp.sense == Sense::Max ? v > *best : v < *best)) best = v;
      }
    }
    int i = n - 1;
    while (i >= 0 && pick[i] == k - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

/// Random LP with small integer data. When `pointed` is set all lower bounds are finite.
inline LinearProgram random_lp(std::mt19937_64& rng, int rows, int cols, bool pointed) {
  auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto integer = [&rng](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
  LinearProgram lp;
  lp.sense = (rng() & 1U) ? Sense::Max : Sense::Min;
  lp.objective.resize(cols);
  lp.constraints.resize(rows, cols);
  lp.rhs.resize(rows);
  lp.row_senses.resize(static_cast<std::size_t>(rows));
  lp.lower.resize(cols);
  lp.upper.resize(cols);
  for (int j = 0; j < cols; ++j) lp.objective[j] = integer(-5, 5);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) lp.constraints(i, j) = unit() < 0.3 ? 0.0 : integer(-4, 6);
    lp.rhs[i] = integer(-6, 12);
    const double s = unit();
    lp.row_senses[i] = s < 0.65 ? RowSense::LE : (s < 0.9 ? RowSense::GE : RowSense::EQ);
  }
  for (int j = 0; j < cols; ++j) {
    const double s = unit();
    if (pointed || s < 0.6) {
      lp.lower[j] = unit() < 0.8 ? 0.0 : integer(-3, 2);
      lp.upper[j] = unit() < 0.5 ? benders_atoms::kInf : lp.lower[j] + integer(0, 6);
    } else if (s < 0.8) {
      lp.lower[j] = -benders_atoms::kInf;
      lp.upper[j] = integer(-2, 4);
    } else {
      lp.lower[j] = -benders_atoms::kInf;
      lp.upper[j] = benders_atoms::kInf;
    }
  }
  return lp;
}

}  // namespace lp_oracle
