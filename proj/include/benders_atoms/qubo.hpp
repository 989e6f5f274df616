#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "benders_atoms/cut_pool.hpp"
#include "benders_atoms/milp_model.hpp"

namespace benders_atoms {

/// Positional binary encoding of a bounded real:
///   value = sum_{i<P} 2^i w_i + sum_{j=1..D} 2^-j w_{P+j} - sum_{k=1..N} 2^(k-1) w_{P+D+k}
struct BinaryEncoding {
  int P = 0;
  int D = 0;
  int N = 0;
  int offset = 0;

  int bits() const { return P + D + N; }
  /// Weight of the i-th local bit (0 <= i < bits()).
  double weight(int i) const;
  double value(const Bits& z) const;
  double max_value() const;
  double min_value() const;
};

/// Sizes an encoding for values in [lower, upper] with `frac_bits` fractional bits.
/// upper < 1 gives no integer bits; the range {0} gives no bits at all.
BinaryEncoding size_encoding(double upper, double lower, int frac_bits);

/// Fractional bit count for a precision eps in (0, 1]: the smallest D with 2^-D <= eps.
int fractional_bits(double eps);

struct PenaltyWeights {
  double pi_obj = 1.0;
  double pi1 = 100.0;  // master rows
  double pi2 = 100.0;  // optimality cuts
  double pi3 = 100.0;  // feasibility cuts

  /// Throws ConfigError unless pi1, pi2, pi3 > 0 and pi_obj >= 0.
  void validate() const;
};

/// Upper bounds for every encoded quantity. Cut entries follow the pool order.
struct BoundSet {
  double phi_max = 0.0;
  double phi_min = 0.0;
  std::vector<double> master_slack_max;
  std::vector<double> optimality_slack_max;
  std::vector<double> feasibility_slack_max;
};

/// phi bounds and master-row slack bounds from the tightened relaxation.
BoundSet relaxation_bounds(const OriginalProblem& op);
/// Fills the cut entries by interval arithmetic over x in [0,1]^n (negative bounds clamp to 0).
void add_cut_bounds(BoundSet& bounds, const CutPool& cuts);
/// Largest value of the slack of `cut` over the box, before clamping.
double cut_slack_bound(const BendersCut& cut, double phi_min);

enum class VarRole { XBit, Phi, MasterSlack, OptimalitySlack, FeasibilitySlack };
std::string_view to_string(VarRole role);

struct LayoutEntry {
  VarRole role = VarRole::XBit;
  int index = 0;  // x index, master row, or cut index within its kind
  BinaryEncoding encoding;
};

/// One penalized equality  coefficients'z - rhs = 0  over the bitstring z.
struct EncodedEquality {
  VarRole role = VarRole::MasterSlack;  // master row or cut kind it came from
  int index = 0;
  Eigen::VectorXd coefficients;  // length t
  double rhs = 0.0;
  double weight = 0.0;
};

struct QuboModel {
  Eigen::MatrixXd Q;  // symmetric
  double constant = 0.0;
  std::vector<LayoutEntry> layout;  // empty for a raw matrix
  std::vector<EncodedEquality> equalities;
  Eigen::VectorXd objective;  // per-bit coefficients of c'x + phi
  double pi_obj = 0.0;
  int n = 0;
  int m2 = 0;
  std::vector<BendersCut> cuts;  // optimality cuts first, then feasibility cuts

  int t() const { return static_cast<int>(Q.rows()); }
  bool has_layout() const { return !layout.empty(); }
  const LayoutEntry* find(VarRole role, int index = 0) const;

  /// z'Qz + constant.
  double cost(const Bits& z) const;
};

/// Wraps a bare matrix (symmetrized) as a model without variable layout.
QuboModel qubo_from_matrix(const Eigen::MatrixXd& Q, double constant = 0.0);

struct QuboOptions {
  double epsilon = 0.5;
  int slack_extra_bits = 4;  // extra fractional slack bits for non-integral rows
  int max_qubits = 1 << 20;
};

/// Compiles the master problem with the current cuts. Throws BoundError for missing or negative
/// bounds and SizeError when t exceeds the qubit budget.
QuboModel build_qubo(const OriginalProblem& op, const CutPool& cuts, const PenaltyWeights& weights,
                     const BoundSet& bounds, const QuboOptions& options = {});

/// t without materializing Q.
int qubit_count(const OriginalProblem& op, const CutPool& cuts, const BoundSet& bounds,
                const QuboOptions& options = {});

struct DecodedMaster {
  Bits x;
  double phi = 0.0;
  Eigen::VectorXd master_slacks;
  Eigen::VectorXd cut_slacks;  // optimality cuts first, then feasibility cuts
  Eigen::VectorXd penalty_residuals;
  double qubo_cost = 0.0;
  double objective = 0.0;  // c'x + phi
};

/// Throws LengthError when |z| != t.
DecodedMaster decode(const QuboModel& model, const OriginalProblem& op, const Bits& z);

/// Bitstring that decodes to the given x, phi and slacks; values are rounded down to the grid.
Bits encode(const QuboModel& model, const Bits& x, double phi, const Eigen::VectorXd& master_slacks,
            const Eigen::VectorXd& cut_slacks);

/// The penalty Hamiltonian evaluated term by term from the encoded equalities (no use of Q).
double penalty_hamiltonian(const QuboModel& model, const Bits& z);

// Interchange format {"t", "constant", "entries": [[i, j, q_ij]]} with i <= j.
nlohmann::json qubo_to_json(const QuboModel& model);
QuboModel qubo_from_json(const nlohmann::json& j);
void save_qubo(const QuboModel& model, const std::filesystem::path& path);
QuboModel load_qubo(const std::filesystem::path& path);

}  // namespace benders_atoms
