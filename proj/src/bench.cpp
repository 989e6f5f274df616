#include "benders_atoms/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

#include "benders_atoms/errors.hpp"

namespace benders_atoms {

namespace {

std::string instance_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "inst-%04d", index);
  return buf;
}

std::string opt_field(const std::optional<double>& v) { return v ? format_sig(*v) : ""; }

// Commas and newlines would break the row.
std::string csv_text(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

BenchRecord run_one(const OriginalProblem& op, const MilpSolution& oracle, int index, SamplerKind backend,
                    const BenchConfig& cfg) {
  BenchRecord rec;
  rec.instance = instance_name(index);
  rec.backend = backend;
  rec.seed = mix_seed(cfg.generator.seed, static_cast<std::uint64_t>(index));
  if (oracle.status == SolveStatus::Optimal) rec.optimum = oracle.objective;
  SolverConfig sc = cfg.solver;
  sc.sampler = backend;
  sc.seed = rec.seed;
  try {
    const auto r = solve_hybrid(op, sc);
    rec.qubits = r.first_qubits;
    rec.peak_qubits = r.peak_qubits;
    rec.status = std::string(to_string(r.solution.status));
    rec.iterations = static_cast<int>(r.trace.size());
    rec.wall_ms = r.wall_ms;
    if (r.solution.status == SolveStatus::Optimal || r.solution.status == SolveStatus::Feasible) {
      rec.objective = r.solution.objective;
    }
  } catch (const BudgetExceeded& e) {
    rec.status = "Error";
    rec.error = e.what();
    BoundSet bounds = relaxation_bounds(op);
    QuboOptions opt;
    opt.epsilon = sc.epsilon;
    opt.slack_extra_bits = sc.slack_extra_bits;
    rec.qubits = qubit_count(op, CutPool{}, bounds, opt);
  } catch (const Error& e) {
    rec.status = "Error";
    rec.error = e.what();
  }
  rec.gap = optimality_gap(rec.objective, rec.optimum);
  return rec;
}

}  // namespace

std::pair<double, double> mean_ci95(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  const double k = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= k;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, 1.96 * std::sqrt(ss / (k - 1.0)) / std::sqrt(k)};
}

int bench_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BENDERS_ATOMS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<BenchRecord> run_bench(const BenchConfig& cfg) {
  if (cfg.backends.empty()) throw ConfigError("at least one backend is required");
  cfg.solver.validate();
  const auto instances = generate_instances(cfg.generator);
  const std::size_t nb = cfg.backends.size();
  std::vector<MilpSolution> oracles(instances.size());
  std::vector<BenchRecord> records(instances.size() * nb);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      try {
        oracles[i] = brute_force_solve(instances[i]);
      } catch (const Error&) {
        oracles[i].status = SolveStatus::Infeasible;
      }
      for (std::size_t b = 0; b < nb; ++b) {
        records[i * nb + b] = run_one(instances[i], oracles[i], static_cast<int>(i), cfg.backends[b], cfg);
      }
    }
  };
  const int threads = std::min<int>(bench_threads(cfg.threads), static_cast<int>(std::max<std::size_t>(1, instances.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return records;
}

std::vector<Aggregate> aggregate(const std::vector<BenchRecord>& records) {
  std::map<std::pair<int, int>, std::vector<const BenchRecord*>> groups;
  for (const auto& r : records) {
    if (!r.optimum) continue;
    groups[{static_cast<int>(r.backend), r.qubits}].push_back(&r);
  }
  std::vector<Aggregate> out;
  for (const auto& [key, recs] : groups) {
    Aggregate a;
    a.backend = static_cast<SamplerKind>(key.first);
    a.qubits = key.second;
    a.instances = static_cast<int>(recs.size());
    std::vector<double> gaps, iters;
    int feasible = 0;
    for (const auto* r : recs) {
      if (r->feasible()) ++feasible;
      if (r->gap) gaps.push_back(std::abs(*r->gap));
      iters.push_back(r->iterations);
    }
    a.feasible_pct = 100.0 * feasible / a.instances;
    a.gap_count = static_cast<int>(gaps.size());
    std::tie(a.mean_gap, a.gap_ci) = mean_ci95(gaps);
    std::tie(a.mean_iterations, a.iterations_ci) = mean_ci95(iters);
    out.push_back(a);
  }
  return out;
}

void write_records_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << r.instance << ',' << to_string(r.backend) << ',' << r.qubits << ',' << r.peak_qubits << ',' << r.status
        << ',' << opt_field(r.objective) << ',' << opt_field(r.optimum) << ',' << opt_field(r.gap) << ','
        << r.iterations << ',' << r.seed << ',' << csv_text(r.error) << '\n';
  }
}

void write_aggregates_csv(const std::vector<Aggregate>& aggregates, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kAggregatesHeader << '\n';
  for (const auto& a : aggregates) {
    out << to_string(a.backend) << ',' << a.qubits << ',' << a.instances << ',' << format_sig(a.feasible_pct) << ','
        << (a.gap_count ? format_sig(a.mean_gap) : "") << ',' << (a.gap_count ? format_sig(a.gap_ci) : "") << ','
        << format_sig(a.mean_iterations) << ',' << format_sig(a.iterations_ci) << '\n';
  }
}

void write_timings_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kTimingsHeader << '\n';
  for (const auto& r : records) out << r.instance << ',' << to_string(r.backend) << ',' << format_sig(r.wall_ms) << '\n';
}

}  // namespace benders_atoms
