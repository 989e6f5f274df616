#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "benders_atoms/benders.hpp"
#include "benders_atoms/milp_model.hpp"

namespace benders_atoms {

struct BenchConfig {
  GeneratorConfig generator{{2, 5}, {2, 10}, {5, 14}, 1, 60};
  std::vector<SamplerKind> backends{SamplerKind::Exact, SamplerKind::Anneal};
  SolverConfig solver;  // sampler and seed are set per run
  int threads = 0;      // 0: BENDERS_ATOMS_THREADS or the hardware count
};

struct BenchRecord {
  std::string instance;
  SamplerKind backend = SamplerKind::Exact;
  int qubits = 0;  // t at the first iteration
  int peak_qubits = 0;
  std::string status;  // SolveStatus name, or "Error"
  std::optional<double> objective;
  std::optional<double> optimum;
  std::optional<double> gap;
  int iterations = 0;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  std::string error;

  bool feasible() const { return objective.has_value(); }
};

struct Aggregate {
  SamplerKind backend = SamplerKind::Exact;
  int qubits = 0;
  int instances = 0;
  double feasible_pct = 0.0;
  int gap_count = 0;
  double mean_gap = 0.0;  // mean |gap| over records where the gap exists
  double gap_ci = 0.0;    // 95% half-width, normal approximation
  double mean_iterations = 0.0;
  double iterations_ci = 0.0;
};

/// Mean and 95% normal-approximation half-width (zero below two values).
std::pair<double, double> mean_ci95(const std::vector<double>& values);

/// Worker count: an explicit request, else BENDERS_ATOMS_THREADS, else the hardware count.
int bench_threads(int requested);

/// One record per instance and backend, in instance order then backend order.
std::vector<BenchRecord> run_bench(const BenchConfig& cfg);

/// Records grouped by (backend, first-iteration qubits); only instances with an oracle optimum count.
std::vector<Aggregate> aggregate(const std::vector<BenchRecord>& records);

void write_records_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);
void write_aggregates_csv(const std::vector<Aggregate>& aggregates, const std::filesystem::path& path);
/// Wall times live apart from the records so repeated runs give identical records.
void write_timings_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);

inline constexpr const char* kRecordsHeader =
    "instance,backend,qubits,peak_qubits,status,objective,optimum,gap,iterations,seed,error";
inline constexpr const char* kAggregatesHeader =
    "backend,qubits,instances,feasible_pct,mean_abs_gap,gap_ci95,mean_iterations,iterations_ci95";
inline constexpr const char* kTimingsHeader = "instance,backend,wall_ms";

}  // namespace benders_atoms
