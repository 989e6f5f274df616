#include "benders_atoms/cut_pool.hpp"

#include <cmath>

#include "benders_atoms/errors.hpp"

namespace benders_atoms {

namespace {

constexpr double kDuplicateTol = 1e-9;

BendersCut make_cut(CutKind kind, const Eigen::VectorXd& v, const OriginalProblem& op) {
  if (v.size() != op.m1()) throw DimensionError("cut multipliers must have length m1");
  if (!v.allFinite()) throw BoundError("cut multipliers must be finite");
  BendersCut cut;
  cut.kind = kind;
  cut.multipliers = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < -kDuplicateTol) throw BoundError("cut multipliers must be nonnegative");
    if (v[i] < 0.0) cut.multipliers[i] = 0.0;
  }
  cut.constant = op.m1() > 0 ? op.b.dot(cut.multipliers) : 0.0;
  cut.coefficients = op.m1() > 0 ? Eigen::VectorXd(op.A.transpose() * cut.multipliers)
                                 : Eigen::VectorXd(Eigen::VectorXd::Zero(op.n()));
  return cut;
}

}  // namespace

double BendersCut::value(const Bits& x) const { return constant - coefficients.dot(to_vector(x)); }

BendersCut make_optimality_cut(const Eigen::VectorXd& mu, const OriginalProblem& op) {
  return make_cut(CutKind::Optimality, mu, op);
}

BendersCut make_feasibility_cut(const Eigen::VectorXd& r, const OriginalProblem& op) {
  return make_cut(CutKind::Feasibility, r, op);
}

bool CutPool::contains(const BendersCut& cut) const {
  const auto& list = cut.kind == CutKind::Optimality ? optimality_ : feasibility_;
  for (const auto& other : list) {
    if (other.multipliers.size() != cut.multipliers.size()) continue;
    if (other.multipliers.size() == 0 ||
        (other.multipliers - cut.multipliers).cwiseAbs().maxCoeff() <= kDuplicateTol) {
      return true;
    }
  }
  return false;
}

const BendersCut& CutPool::add(BendersCut cut) {
  if (contains(cut)) throw DuplicateCut("cut already present in the pool");
  auto& list = cut.kind == CutKind::Optimality ? optimality_ : feasibility_;
  list.push_back(std::move(cut));
  return list.back();
}

}  // namespace benders_atoms
