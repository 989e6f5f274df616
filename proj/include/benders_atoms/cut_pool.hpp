#pragma once

#include <vector>

#include <Eigen/Dense>

#include "benders_atoms/milp_model.hpp"

namespace benders_atoms {

enum class CutKind { Optimality, Feasibility };

/// Optimality cut:  phi <= (b - A x)'mu  =  constant - coefficients'x
/// Feasibility cut: 0   <= (b - A x)'r   =  constant - coefficients'x
struct BendersCut {
  CutKind kind = CutKind::Optimality;
  Eigen::VectorXd multipliers;   // mu or r, length m1, >= 0
  double constant = 0.0;         // b'mu or b'r
  Eigen::VectorXd coefficients;  // A'mu or A'r, length n

  /// (b - A x)'mu at a binary x.
  double value(const Bits& x) const;
};

BendersCut make_optimality_cut(const Eigen::VectorXd& mu, const OriginalProblem& op);
BendersCut make_feasibility_cut(const Eigen::VectorXd& r, const OriginalProblem& op);

class CutPool {
 public:
  /// Throws DuplicateCut when an identical cut of the same kind is already stored.
  const BendersCut& add(BendersCut cut);

  const std::vector<BendersCut>& optimality() const { return optimality_; }
  const std::vector<BendersCut>& feasibility() const { return feasibility_; }
  std::size_t size() const { return optimality_.size() + feasibility_.size(); }
  bool contains(const BendersCut& cut) const;

 private:
  std::vector<BendersCut> optimality_;
  std::vector<BendersCut> feasibility_;
};

}  // namespace benders_atoms
