#include "benders_atoms/benders.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "benders_atoms/errors.hpp"

namespace benders_atoms {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

double slack_resolution(const QuboModel& model, VarRole role, int index) {
  const auto* e = model.find(role, index);
  return e ? std::ldexp(1.0, -e->encoding.D - 1) : 0.0;
}

bool cuts_hold(const QuboModel& model, const DecodedMaster& d) {
  const auto* phi = model.find(VarRole::Phi);
  const double phi_tol = phi ? std::ldexp(1.0, -phi->encoding.D - 1) : 0.0;
  int opt = 0, feas = 0;
  for (const auto& cut : model.cuts) {
    const double g = cut.value(d.x);
    if (cut.kind == CutKind::Optimality) {
      if (d.phi > g + phi_tol + slack_resolution(model, VarRole::OptimalitySlack, opt) + 1e-7) return false;
      ++opt;
    } else {
      if (g < -1e-7) return false;
      ++feas;
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Exact:
      return "exact";
    case SamplerKind::Anneal:
      return "anneal";
    case SamplerKind::Emulator:
      return "emulator";
  }
  return "?";
}

SamplerKind sampler_kind_from_string(std::string_view name) {
  if (name == "exact") return SamplerKind::Exact;
  if (name == "anneal") return SamplerKind::Anneal;
  if (name == "emulator") return SamplerKind::Emulator;
  throw ConfigError("unknown sampler '" + std::string(name) + "'");
}

std::string_view to_string(CutAdded cut) {
  switch (cut) {
    case CutAdded::None:
      return "None";
    case CutAdded::Optimality:
      return "Optimality";
    case CutAdded::Feasibility:
      return "Feasibility";
  }
  return "?";
}

void SolverConfig::validate() const {
  weights.validate();
  fractional_bits(epsilon);
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(eps_conv > 0.0)) throw ConfigError("convergence tolerance must be positive");
  if (shots < 1) throw ConfigError("shots must be at least 1");
  if (max_qubits < 1) throw ConfigError("qubit budget must be positive");
  if (slack_extra_bits < 0) throw ConfigError("slack_extra_bits must be nonnegative");
  if (emulator.pulse_iterations < 1) throw ConfigError("pulse iterations must be at least 1");
  if (!(emulator.dt_fraction > 0.0) || emulator.dt_fraction > 0.01) {
    throw ConfigError("emulator time step must lie in (0, T/100]");
  }
}

std::unique_ptr<Sampler> make_sampler(const SolverConfig& cfg) {
  switch (cfg.sampler) {
    case SamplerKind::Exact:
      return std::make_unique<ExactSampler>();
    case SamplerKind::Anneal:
      return std::make_unique<AnnealSampler>();
    case SamplerKind::Emulator:
      return std::make_unique<EmulatorSampler>(cfg.emulator);
  }
  throw ConfigError("unknown sampler");
}

Candidate select_candidate(const SampleSet& samples, const QuboModel& model, const OriginalProblem& op) {
  if (samples.entries.empty()) throw Error("cannot select from an empty sample set");
  std::optional<Candidate> best;
  for (const auto& e : samples.entries) {
    Candidate c;
    c.decoded = decode(model, op, e.bits);
    c.bits = e.bits;
    c.master_feasible = master_rows_hold(op, c.decoded.x) && cuts_hold(model, c.decoded);
    if (!c.master_feasible) continue;
    if (!best || c.decoded.objective > best->decoded.objective + 1e-9) best = std::move(c);
  }
  if (best) return *best;
  Candidate fallback;
  fallback.bits = samples.entries.front().bits;
  fallback.decoded = decode(model, op, fallback.bits);
  fallback.master_feasible = false;
  return fallback;
}

nlohmann::json trace_to_json(const IterationTrace& it, bool with_timing) {
  nlohmann::json j;
  j["iteration"] = it.index;
  j["qubits"] = it.qubits;
  j["cuts_in_model"] = it.cuts_in_model;
  j["qubo_constant"] = it.qubo_constant;
  j["distinct_samples"] = it.distinct_samples;
  j["best_sample_cost"] = it.best_sample_cost;
  j["x"] = bits_to_string(it.x);
  j["phi"] = it.phi;
  j["master_slacks"] = vec_json(it.master_slacks);
  j["cut_slacks"] = vec_json(it.cut_slacks);
  j["penalty_residuals"] = vec_json(it.penalty_residuals);
  j["mp_objective"] = it.mp_objective;
  j["master_feasible"] = it.master_feasible;
  j["sp_status"] = it.sp_status == LpStatus::Optimal ? "Optimal"
                   : it.sp_status == LpStatus::Infeasible ? "Infeasible"
                                                          : "Unbounded";
  if (it.sp_status == LpStatus::Optimal) j["sp_value"] = it.sp_value;
  j["y"] = vec_json(it.y);
  j["multipliers"] = vec_json(it.multipliers);
  j["cut"] = std::string(to_string(it.cut));
  if (with_timing) {
    j["build_ms"] = it.build_ms;
    j["sample_ms"] = it.sample_ms;
    j["subproblem_ms"] = it.subproblem_ms;
  }
  return j;
}

HybridResult solve_hybrid(const OriginalProblem& op, const SolverConfig& cfg) {
  const auto start = Clock::now();
  op.validate();
  cfg.validate();
  HybridResult result;
  auto finish = [&](SolveStatus status, std::string reason) {
    result.solution.status = status;
    result.stop_reason = std::move(reason);
    result.wall_ms = ms_since(start);
    return result;
  };

  BoundSet bounds;
  try {
    bounds = relaxation_bounds(op);
  } catch (const RelaxationUnbounded&) {
    return finish(SolveStatus::Unbounded, "unbounded");
  } catch (const RelaxationInfeasible&) {
    return finish(SolveStatus::Infeasible, "infeasible");
  }

  const auto sampler = make_sampler(cfg);
  const int budget = std::min(cfg.max_qubits, sampler->max_qubits());
  QuboOptions qopt;
  qopt.epsilon = cfg.epsilon;
  qopt.slack_extra_bits = cfg.slack_extra_bits;
  qopt.max_qubits = budget;
  const double eps_conv = std::max(cfg.eps_conv, 0.5 * std::ldexp(1.0, -fractional_bits(cfg.epsilon)));

  SamplerConfig scfg;
  scfg.shots = cfg.shots;
  scfg.anneal = cfg.anneal;

  CutPool pool;
  std::optional<MilpSolution> incumbent;
  std::string reason = "max_iterations";
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    IterationTrace tr;
    tr.index = it;
    auto t0 = Clock::now();
    add_cut_bounds(bounds, pool);
    tr.qubits = qubit_count(op, pool, bounds, qopt);
    if (it == 1) result.first_qubits = tr.qubits;
    if (tr.qubits > budget) {
      if (it == 1) {
        throw BudgetExceeded("master problem needs " + std::to_string(tr.qubits) + " qubits, budget is " +
                             std::to_string(budget));
      }
      reason = "budget";
      break;
    }
    result.peak_qubits = std::max(result.peak_qubits, tr.qubits);
    const QuboModel model = build_qubo(op, pool, cfg.weights, bounds, qopt);
    tr.cuts_in_model = static_cast<int>(pool.size());
    tr.qubo_constant = model.constant;
    tr.build_ms = ms_since(t0);

    t0 = Clock::now();
    scfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(it));
    const SampleSet samples = sampler->sample(model, scfg);
    tr.distinct_samples = static_cast<int>(samples.entries.size());
    tr.best_sample_cost = samples.best().cost;
    const Candidate cand = select_candidate(samples, model, op);
    tr.sample_ms = ms_since(t0);
    tr.x = cand.decoded.x;
    tr.phi = cand.decoded.phi;
    tr.master_slacks = cand.decoded.master_slacks;
    tr.cut_slacks = cand.decoded.cut_slacks;
    tr.penalty_residuals = cand.decoded.penalty_residuals;
    tr.mp_objective = cand.decoded.objective;
    tr.master_feasible = cand.master_feasible;
    result.phi = cand.decoded.phi;

    t0 = Clock::now();
    const SubproblemOutcome sp = solve_subproblem(op, cand.decoded.x);
    tr.subproblem_ms = ms_since(t0);
    tr.sp_status = sp.status;
    const bool rows_ok = master_rows_hold(op, cand.decoded.x);

    if (sp.status == LpStatus::Unbounded) {
      result.trace.push_back(tr);
      result.solution.x = cand.decoded.x;
      return finish(SolveStatus::Unbounded, "unbounded");
    }

    bool stop = false;
    try {
      if (sp.status == LpStatus::Infeasible) {
        tr.multipliers = sp.ray;
        const auto& cut = pool.add(make_feasibility_cut(sp.ray, op));
        tr.cut = CutAdded::Feasibility;
        if (cut_slack_bound(cut, bounds.phi_min) < -1e-9) {
          // the cut excludes the whole box
          result.trace.push_back(tr);
          reason = "infeasible";
          stop = true;
        }
      } else {
        tr.sp_value = sp.value;
        tr.y = sp.y;
        tr.multipliers = sp.mu;
        bounds.phi_min = std::min(bounds.phi_min, sp.value);
        if (rows_ok) {
          const double obj = op.c.dot(to_vector(cand.decoded.x)) + sp.value;
          if (!incumbent || obj > incumbent->objective + 1e-9) {
            incumbent = MilpSolution{cand.decoded.x, sp.y, obj, SolveStatus::Feasible};
          }
        }
        if (sp.value < cand.decoded.phi - eps_conv) {
          pool.add(make_optimality_cut(sp.mu, op));
          tr.cut = CutAdded::Optimality;
        } else if (rows_ok) {
          result.trace.push_back(tr);
          result.converged = true;
          reason = "converged";
          stop = true;
        } else {
          result.trace.push_back(tr);
          reason = "stalled";
          stop = true;
        }
      }
    } catch (const DuplicateCut&) {
      tr.cut = CutAdded::None;
      result.trace.push_back(tr);
      reason = "stalled";
      stop = true;
    }
    if (stop) break;
    result.trace.push_back(tr);
  }

  if (reason == "infeasible") return finish(SolveStatus::Infeasible, reason);
  if (!incumbent) return finish(SolveStatus::Infeasible, reason);
  result.solution = *incumbent;
  return finish(result.converged ? SolveStatus::Optimal : SolveStatus::Feasible, reason);
}

std::optional<double> optimality_gap(std::optional<double> algo, std::optional<double> opt) {
  if (!algo || !opt || *opt == 0.0 || !std::isfinite(*algo) || !std::isfinite(*opt)) return std::nullopt;
  return (*algo - *opt) / *opt;
}

void write_trace_jsonl(const HybridResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& it : result.trace) out << trace_to_json(it).dump() << '\n';
}

void write_summary_csv(const HybridResult& result, const std::string& instance_id, std::optional<double> optimum,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const bool has_obj =
      result.solution.status == SolveStatus::Optimal || result.solution.status == SolveStatus::Feasible;
  const auto gap = optimality_gap(has_obj ? std::optional<double>(result.solution.objective) : std::nullopt, optimum);
  out << "instance,status,objective,gap,iterations,qubits,wall_ms\n";
  out << instance_id << ',' << to_string(result.solution.status) << ','
      << (has_obj ? format_sig(result.solution.objective) : "") << ',' << (gap ? format_sig(*gap) : "") << ','
      << result.trace.size() << ',' << result.first_qubits << ',' << format_sig(result.wall_ms) << '\n';
}

}  // namespace benders_atoms
