#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "benders_atoms/bench.hpp"
#include "benders_atoms/benders.hpp"
#include "benders_atoms/errors.hpp"

namespace fs = std::filesystem;
using namespace benders_atoms;

namespace {

const char* error_name(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const BudgetExceeded*>(&e)) return "BudgetExceeded";
  if (dynamic_cast<const CapacityError*>(&e)) return "CapacityError";
  if (dynamic_cast<const SizeError*>(&e)) return "SizeError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const NormDriftError*>(&e)) return "NormDriftError";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  return "Error";
}

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
    case SolveStatus::Feasible:
      return 0;
    case SolveStatus::Infeasible:
      return 2;
    case SolveStatus::Unbounded:
      return 3;
  }
  return 1;
}

struct SolverFlags {
  std::string sampler = "exact";
  std::uint64_t seed = 1;
  int shots = 500;
  double epsilon = 0.5;
  double pi_obj = 1.0, pi1 = 100.0, pi2 = 100.0, pi3 = 100.0;
  int max_qubits = 64;
  int max_iters = 50;
  int pulse_iters = 20;
  int anneal_sweeps_per_bit = 200;

  void attach(CLI::App* app) {
    app->add_option("--sampler", sampler, "Master problem backend")
        ->check(CLI::IsMember({"exact", "anneal", "emulator"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--shots", shots, "Samples per master problem")->capture_default_str();
    app->add_option("--epsilon", epsilon, "Precision of the continuous encodings")->capture_default_str();
    app->add_option("--pi-obj", pi_obj, "Objective weight")->capture_default_str();
    app->add_option("--pi1", pi1, "Master-row penalty")->capture_default_str();
    app->add_option("--pi2", pi2, "Optimality-cut penalty")->capture_default_str();
    app->add_option("--pi3", pi3, "Feasibility-cut penalty")->capture_default_str();
    app->add_option("--max-qubits", max_qubits, "Qubit budget per master problem")->capture_default_str();
    app->add_option("--max-iters", max_iters, "Benders iteration cap")->capture_default_str();
    app->add_option("--pulse-iters", pulse_iters, "Pulse evaluations per emulator call")->capture_default_str();
    app->add_option("--sweeps-per-bit", anneal_sweeps_per_bit, "Annealing sweeps per bit")->capture_default_str();
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.sampler = sampler_kind_from_string(sampler);
    cfg.seed = seed;
    cfg.shots = shots;
    cfg.epsilon = epsilon;
    cfg.weights = PenaltyWeights{pi_obj, pi1, pi2, pi3};
    cfg.max_qubits = max_qubits;
    cfg.max_iterations = max_iters;
    cfg.emulator.pulse_iterations = pulse_iters;
    cfg.anneal.sweeps_per_bit = anneal_sweeps_per_bit;
    return cfg;
  }
};

std::string stem_of(const fs::path& p) {
  std::string s = p.filename().string();
  const auto dot = s.find('.');
  return dot == std::string::npos ? s : s.substr(0, dot);
}

int cmd_solve(const std::string& instance, const SolverFlags& flags, const std::string& out_dir,
              const std::string& export_qubo) {
  const auto op = load_instance(instance);
  const auto cfg = flags.config();
  if (!export_qubo.empty()) {
    const auto bounds = relaxation_bounds(op);
    QuboOptions opt;
    opt.epsilon = cfg.epsilon;
    opt.slack_extra_bits = cfg.slack_extra_bits;
    save_qubo(build_qubo(op, CutPool{}, cfg.weights, bounds, opt), export_qubo);
  }
  const auto result = solve_hybrid(op, cfg);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const std::string id = stem_of(instance);
  write_trace_jsonl(result, dir / (id + ".trace.jsonl"));
  std::optional<double> optimum;
  if (op.n() <= 20) {
    const auto oracle = brute_force_solve(op);
    if (oracle.status == SolveStatus::Optimal) optimum = oracle.objective;
  }
  write_summary_csv(result, id, optimum, dir / (id + ".summary.csv"));
  std::cout << "status=" << to_string(result.solution.status);
  if (result.solution.status == SolveStatus::Optimal || result.solution.status == SolveStatus::Feasible) {
    std::cout << " objective=" << format_number(result.solution.objective);
  }
  std::cout << " iterations=" << result.trace.size() << '\n';
  return exit_code(result.solution.status);
}

int cmd_generate(GeneratorConfig gen, const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const auto instances = generate_instances(gen);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    char name[40];
    std::snprintf(name, sizeof name, "inst-%04zu.milp.json", i);
    save_instance(instances[i], dir / name);
  }
  std::cout << "wrote " << instances.size() << " instances to " << dir.string() << '\n';
  return 0;
}

int cmd_bench(BenchConfig cfg, const std::vector<std::string>& backends, const std::string& out_dir) {
  cfg.backends.clear();
  for (const auto& b : backends) cfg.backends.push_back(sampler_kind_from_string(b));
  const auto records = run_bench(cfg);
  const auto aggs = aggregate(records);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_records_csv(records, dir / "records.csv");
  write_aggregates_csv(aggs, dir / "aggregates.csv");
  write_timings_csv(records, dir / "timings.csv");
  std::cout << kAggregatesHeader << '\n';
  std::ifstream in(dir / "aggregates.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) std::cout << line << '\n';
  return 0;
}

int cmd_embed(const std::string& qubo_path, const DeviceSpec& device, std::uint64_t seed, const std::string& out) {
  const auto model = load_qubo(qubo_path);
  const auto emb = embed(model, device, seed);
  save_register(emb.reg, out);
  std::cout << "atoms=" << emb.reg.size() << " deviation=" << format_number(emb.deviation)
            << " spacing=" << format_number(emb.spacing) << " greedy_verified=" << (verify_greedy(emb, model) ? 1 : 0)
            << '\n';
  return 0;
}

int cmd_trace_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path);
  std::string line;
  std::printf("%4s %6s %5s %-12s %12s %12s %12s %-10s %-11s\n", "iter", "qubits", "cuts", "x", "phi", "mp_obj",
              "sp_value", "sp_status", "cut");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed trace line: ") + e.what());
    }
    const std::string sp_value = j.contains("sp_value") ? format_number(j["sp_value"].get<double>()) : "-";
    std::printf("%4d %6d %5d %-12s %12s %12s %12s %-10s %-11s\n", j.at("iteration").get<int>(),
                j.at("qubits").get<int>(), j.at("cuts_in_model").get<int>(), j.at("x").get<std::string>().c_str(),
                format_number(j.at("phi").get<double>()).c_str(),
                format_number(j.at("mp_objective").get<double>()).c_str(), sp_value.c_str(),
                j.at("sp_status").get<std::string>().c_str(), j.at("cut").get<std::string>().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid Benders decomposition for binary-continuous MILPs"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "Solve one instance; writes <id>.trace.jsonl and <id>.summary.csv");
  std::string instance, out_dir = ".", export_qubo;
  SolverFlags flags;
  solve->add_option("instance", instance, "Instance JSON file")->required();
  solve->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  solve->add_option("--export-qubo", export_qubo, "Also write the first master-problem QUBO here");
  flags.attach(solve);

  auto* gen = app.add_subcommand("generate", "Write a random instance suite as inst-NNNN.milp.json");
  GeneratorConfig gcfg;
  gcfg.count = 60;
  std::string gen_out = "instances";
  gen->add_option("--count", gcfg.count, "Instances")->capture_default_str();
  gen->add_option("--seed", gcfg.seed, "Generator seed")->capture_default_str();
  gen->add_option("--n-min", gcfg.n_range.lo)->capture_default_str();
  gen->add_option("--n-max", gcfg.n_range.hi)->capture_default_str();
  gen->add_option("--p-min", gcfg.p_range.lo)->capture_default_str();
  gen->add_option("--p-max", gcfg.p_range.hi)->capture_default_str();
  gen->add_option("--m1-min", gcfg.m1_range.lo)->capture_default_str();
  gen->add_option("--m1-max", gcfg.m1_range.hi)->capture_default_str();
  gen->add_option("--out-dir", gen_out, "Output directory")->capture_default_str();

  auto* bench = app.add_subcommand("bench", R"(Run backends over a generated suite.
Writes records.csv (instance,backend,qubits,peak_qubits,status,objective,optimum,gap,iterations,seed,error),
aggregates.csv (backend,qubits,instances,feasible_pct,mean_abs_gap,gap_ci95,mean_iterations,iterations_ci95)
and timings.csv (instance,backend,wall_ms). qubits is t at the first iteration; gap = (obj - opt) / opt;
reals carry 9 significant digits.)");
  BenchConfig bcfg;
  SolverFlags bflags;
  std::vector<std::string> backends{"exact", "anneal"};
  std::string bench_out = "bench";
  bool full = false;
  bench->add_option("--count", bcfg.generator.count, "Instances")->capture_default_str();
  bench->add_flag("--full", full, "Use the 450-instance suite");
  bench->add_option("--backends", backends, "Backends to compare")
      ->delimiter(',')
      ->check(CLI::IsMember({"exact", "anneal", "emulator"}))
      ->capture_default_str();
  bench->add_option("--threads", bcfg.threads, "Worker threads (default BENDERS_ATOMS_THREADS or all cores)");
  bench->add_option("--out-dir", bench_out, "Output directory")->capture_default_str();
  bflags.attach(bench);
  bench->remove_option(bench->get_option("--sampler"));

  auto* emb = app.add_subcommand("embed", "Place a QUBO on an atom register and report the deviation");
  std::string qubo_path, reg_out = "register.json";
  DeviceSpec device;
  std::uint64_t emb_seed = 1;
  emb->add_option("qubo", qubo_path, "QUBO JSON file")->required();
  emb->add_option("--out", reg_out, "Register JSON output")->capture_default_str();
  emb->add_option("--seed", emb_seed, "Seed for the first atom")->capture_default_str();
  emb->add_option("--c6", device.C6)->capture_default_str();
  emb->add_option("--min-distance", device.min_distance)->capture_default_str();
  emb->add_option("--max-radius", device.max_radius)->capture_default_str();
  emb->add_option("--max-atoms", device.max_atoms)->capture_default_str();

  auto* dump = app.add_subcommand("trace-dump", "Print a trace JSONL file as a table");
  std::string trace_path;
  dump->add_option("trace", trace_path, "Trace JSONL file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return cmd_solve(instance, flags, out_dir, export_qubo);
    if (*gen) return cmd_generate(gcfg, gen_out);
    if (*bench) {
      if (full) bcfg.generator.count = 450;
      bcfg.solver = bflags.config();
      bcfg.generator.seed = bflags.seed;
      return cmd_bench(bcfg, backends, bench_out);
    }
    if (*emb) return cmd_embed(qubo_path, device, emb_seed, reg_out);
    if (*dump) return cmd_trace_dump(trace_path);
  } catch (const Error& e) {
    std::cerr << error_name(e) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
