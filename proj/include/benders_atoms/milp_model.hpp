#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "benders_atoms/types.hpp"

namespace benders_atoms {

/// Mixed binary linear program, always in maximization form:
///
///   max  c'x + h'y
///   s.t. A x + G y <= b      (linking rows, m1)
///        B x       <= b'     (master-only rows, m2)
///        x in {0,1}^n, y >= 0
///
/// Minimization inputs have to be negated by the caller.
struct OriginalProblem {
  Eigen::MatrixXd A;        // m1 x n
  Eigen::MatrixXd G;        // m1 x p
  Eigen::VectorXd b;        // m1
  Eigen::MatrixXd B;        // m2 x n
  Eigen::VectorXd b_prime;  // m2
  Eigen::VectorXd c;        // n
  Eigen::VectorXd h;        // p

  int n() const { return static_cast<int>(c.size()); }
  int p() const { return static_cast<int>(h.size()); }
  int m1() const { return static_cast<int>(b.size()); }
  int m2() const { return static_cast<int>(b_prime.size()); }

  /// Throws DimensionError when shapes disagree.
  void validate() const;

  bool operator==(const OriginalProblem& other) const;
};

struct MilpSolution {
  Bits x;
  Eigen::VectorXd y;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
};

/// Largest violation of A x + G y <= b, B x <= b' (0 when feasible).
double constraint_violation(const OriginalProblem& op, const Bits& x, const Eigen::VectorXd& y);
bool master_rows_hold(const OriginalProblem& op, const Bits& x, double tol = 1e-7);

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct GeneratorConfig {
  IntRange n_range{2, 5};
  IntRange p_range{2, 10};
  IntRange m1_range{5, 14};
  std::uint64_t seed = 1;
  int count = 1;
};

/// Random instances with A <= 0, G >= 0, b >= 0, B = 1', 0 < b' < n and c, h >= 0.
std::vector<OriginalProblem> generate_instances(const GeneratorConfig& cfg);

/// Exhaustive oracle: enumerates every x with B x <= b' and solves the LP in y.
MilpSolution brute_force_solve(const OriginalProblem& op);

inline constexpr int kBruteForceMaxBinaries = 20;

// JSON instance files (".milp.json").
OriginalProblem instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const OriginalProblem& op);
OriginalProblem load_instance(const std::filesystem::path& path);
void save_instance(const OriginalProblem& op, const std::filesystem::path& path);

/// The two-binary, four-continuous example used throughout the tests.
OriginalProblem proof_of_concept_instance();

}  // namespace benders_atoms
