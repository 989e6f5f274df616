#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "benders_atoms/cut_pool.hpp"
#include "benders_atoms/lp_solver.hpp"
#include "benders_atoms/qubo.hpp"
#include "benders_atoms/rydberg.hpp"
#include "benders_atoms/samplers.hpp"

namespace benders_atoms {

enum class SamplerKind { Exact, Anneal, Emulator };
std::string_view to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(std::string_view name);

struct SolverConfig {
  SamplerKind sampler = SamplerKind::Exact;
  PenaltyWeights weights;
  double epsilon = 0.5;
  int slack_extra_bits = 4;
  int shots = 500;
  int max_iterations = 50;
  double eps_conv = 1e-6;  // raised to half the phi resolution when coarser
  int max_qubits = 64;     // further capped by the sampler's own limit
  std::uint64_t seed = 1;
  AnnealSchedule anneal;
  EmulatorSettings emulator;

  /// Throws ConfigError for out-of-range settings.
  void validate() const;
};

std::unique_ptr<Sampler> make_sampler(const SolverConfig& cfg);

/// A decoded sample together with its standing in the current master problem.
struct Candidate {
  DecodedMaster decoded;
  Bits bits;
  bool master_feasible = false;  // master rows and all cuts hold at the decoded (x, phi)
};

/// Best decoded sample: among master-feasible samples the largest c'x + phi (earlier entries win
/// ties, so lower cost, then lexicographic); otherwise the minimum-cost sample, flagged.
Candidate select_candidate(const SampleSet& samples, const QuboModel& model, const OriginalProblem& op);

enum class CutAdded { None, Optimality, Feasibility };
std::string_view to_string(CutAdded cut);

struct IterationTrace {
  int index = 0;
  int qubits = 0;
  int cuts_in_model = 0;
  double qubo_constant = 0.0;
  int distinct_samples = 0;
  double best_sample_cost = 0.0;
  Bits x;
  double phi = 0.0;
  Eigen::VectorXd master_slacks;
  Eigen::VectorXd cut_slacks;
  Eigen::VectorXd penalty_residuals;
  double mp_objective = 0.0;  // c'x + phi
  bool master_feasible = false;
  LpStatus sp_status = LpStatus::Infeasible;
  double sp_value = 0.0;
  Eigen::VectorXd y;
  Eigen::VectorXd multipliers;  // mu or r
  CutAdded cut = CutAdded::None;
  double build_ms = 0.0;
  double sample_ms = 0.0;
  double subproblem_ms = 0.0;
};

nlohmann::json trace_to_json(const IterationTrace& it, bool with_timing = true);

struct HybridResult {
  MilpSolution solution;
  std::vector<IterationTrace> trace;
  bool converged = false;
  std::string stop_reason;  // converged, max_iterations, budget, stalled, infeasible, unbounded
  double phi = 0.0;         // decoded phi of the final candidate
  int first_qubits = 0;
  int peak_qubits = 0;
  double wall_ms = 0.0;
};

/// Hybrid loop: build the master QUBO, sample it, pick a candidate, solve the subproblem,
/// add a cut or stop. Throws BudgetExceeded when the first master problem is over the qubit
/// budget; later overruns stop the loop and return the best feasible solution seen.
HybridResult solve_hybrid(const OriginalProblem& op, const SolverConfig& cfg);

/// (algo - opt) / opt when both exist and opt != 0.
std::optional<double> optimality_gap(std::optional<double> algo, std::optional<double> opt);

void write_trace_jsonl(const HybridResult& result, const std::filesystem::path& path);
/// Header plus one row: instance,status,objective,gap,iterations,qubits,wall_ms
void write_summary_csv(const HybridResult& result, const std::string& instance_id,
                       std::optional<double> optimum, const std::filesystem::path& path);

}  // namespace benders_atoms
