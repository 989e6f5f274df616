#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "benders_atoms/benders.hpp"
#include "benders_atoms/errors.hpp"

namespace py = pybind11;
using namespace benders_atoms;

namespace {

OriginalProblem parse(const std::string& text) {
  try {
    return instance_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance: ") + e.what());
  }
}

std::string solution_json(const MilpSolution& s) {
  nlohmann::json j;
  j["status"] = std::string(to_string(s.status));
  if (s.status == SolveStatus::Optimal || s.status == SolveStatus::Feasible) {
    j["objective"] = s.objective;
    j["x"] = bits_to_string(s.x);
    auto y = nlohmann::json::array();
    for (Eigen::Index i = 0; i < s.y.size(); ++i) y.push_back(s.y[i]);
    j["y"] = y;
  }
  return j.dump();
}

std::string solve_json(const std::string& instance, const std::string& sampler, std::uint64_t seed, int shots,
                       double epsilon, int max_qubits, int max_iterations) {
  SolverConfig cfg;
  cfg.sampler = sampler_kind_from_string(sampler);
  cfg.seed = seed;
  cfg.shots = shots;
  cfg.epsilon = epsilon;
  cfg.max_qubits = max_qubits;
  cfg.max_iterations = max_iterations;
  const auto r = solve_hybrid(parse(instance), cfg);
  auto j = nlohmann::json::parse(solution_json(r.solution));
  j["iterations"] = r.trace.size();
  j["converged"] = r.converged;
  j["stop_reason"] = r.stop_reason;
  j["phi"] = r.phi;
  auto trace = nlohmann::json::array();
  for (const auto& it : r.trace) trace.push_back(trace_to_json(it, false));
  j["trace"] = trace;
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hybrid Benders decomposition core";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("proof_of_concept_json", [] { return instance_to_json(proof_of_concept_instance()).dump(); });
  m.def("generate_json", [](int count, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.count = count;
    cfg.seed = seed;
    auto arr = nlohmann::json::array();
    for (const auto& op : generate_instances(cfg)) arr.push_back(instance_to_json(op));
    return arr.dump();
  });
  m.def("brute_force_json", [](const std::string& instance) { return solution_json(brute_force_solve(parse(instance))); });
  m.def("solve_json", &solve_json, py::arg("instance"), py::arg("sampler"), py::arg("seed"), py::arg("shots"),
        py::arg("epsilon"), py::arg("max_qubits"), py::arg("max_iterations"));
  m.def(
      "first_qubo",
      [](const std::string& instance, double epsilon) {
        const auto op = parse(instance);
        QuboOptions opt;
        opt.epsilon = epsilon;
        const auto model = build_qubo(op, CutPool{}, PenaltyWeights{}, relaxation_bounds(op), opt);
        return std::make_pair(Eigen::MatrixXd(model.Q), model.constant);
      },
      py::arg("instance"), py::arg("epsilon") = 0.5);
  m.def("exact_minimize", [](const Eigen::MatrixXd& Q, double constant) {
    const auto [z, cost] = exact_minimize(qubo_from_matrix(Q, constant));
    return std::make_pair(std::vector<int>(z.begin(), z.end()), cost);
  });
}
