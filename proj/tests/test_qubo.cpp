#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "benders_atoms/errors.hpp"
#include "benders_atoms/lp_solver.hpp"
#include "benders_atoms/qubo.hpp"
#include "benders_atoms/samplers.hpp"
#include "doctest.h"

using namespace benders_atoms;

namespace {

Bits bits_of(std::uint64_t mask, int t) {
  Bits z(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) z[i] = (mask >> i) & 1U;
  return z;
}

// Plain polynomial evaluation of z'Qz + constant.
double poly(const QuboModel& m, const Bits& z) {
  double s = m.constant;
  for (int i = 0; i < m.t(); ++i)
    for (int j = 0; j < m.t(); ++j) s += m.Q(i, j) * z[i] * z[j];
  return s;
}

QuboModel poc_first_model(double eps = 0.5) {
  const auto op = proof_of_concept_instance();
  CutPool cuts;
  auto bounds = relaxation_bounds(op);
  add_cut_bounds(bounds, cuts);
  QuboOptions opt;
  opt.epsilon = eps;
  return build_qubo(op, cuts, PenaltyWeights{}, bounds, opt);
}

}  // namespace

TEST_CASE("binary encoding values") {
  BinaryEncoding enc{5, 0, 0, 0};
  CHECK(enc.value(Bits(5, 1)) == 31.0);
  BinaryEncoding mixed{2, 2, 2, 0};
  CHECK(mixed.value(Bits{1, 1, 1, 1, 0, 0}) == 3.75);
  CHECK(mixed.value(Bits{0, 0, 0, 0, 1, 1}) == -3.0);
  CHECK(mixed.max_value() == 3.75);
  CHECK(mixed.min_value() == -3.0);
  CHECK_THROWS_AS(mixed.value(Bits{1}), LengthError);
}

TEST_CASE("encoding sizes") {
  CHECK(fractional_bits(0.5) == 1);
  CHECK(fractional_bits(1.0) == 0);
  CHECK(fractional_bits(0.25) == 2);
  CHECK(fractional_bits(0.3) == 2);
  CHECK_THROWS_AS(fractional_bits(0.0), ConfigError);
  CHECK(size_encoding(31.5, 0.0, 1).P == 5);
  CHECK(size_encoding(17.0, 0.0, 1).P == 5);
  CHECK(size_encoding(16.0, 0.0, 0).P == 5);
  CHECK(size_encoding(15.999999999999, 0.0, 0).P == 5);
  CHECK(size_encoding(3.0, 0.0, 0).bits() == 2);
  CHECK(size_encoding(0.7, 0.0, 2).P == 0);
  CHECK(size_encoding(0.7, 0.0, 2).D == 2);
  CHECK(size_encoding(0.0, 0.0, 3).bits() == 0);
  CHECK(size_encoding(4.0, -3.9, 1).N == 3);
  CHECK(size_encoding(4.0, -0.5, 1).N == 1);
  // every grid point in range is representable
  for (double ub : {0.6, 1.0, 2.5, 3.9, 7.0, 17.0}) {
    const auto enc = size_encoding(ub, 0.0, 1);
    CHECK(enc.max_value() >= std::floor(ub * 2.0) / 2.0);
  }
}

TEST_CASE("proof-of-concept first iteration layout") {
  const auto m = poc_first_model();
  CHECK(m.t() == 9);
  const auto* phi = m.find(VarRole::Phi);
  REQUIRE(phi != nullptr);
  CHECK(phi->encoding.P == 5);
  CHECK(phi->encoding.D == 1);
  CHECK(phi->encoding.N == 0);
  const auto* slack = m.find(VarRole::MasterSlack, 0);
  REQUIRE(slack != nullptr);
  CHECK(slack->encoding.bits() == 1);
  const auto op = proof_of_concept_instance();
  CutPool cuts;
  BoundSet wide;
  wide.phi_max = 31.5;
  wide.master_slack_max = {1.0};
  CHECK(qubit_count(op, cuts, wide) == 9);
  CHECK(qubit_count(op, cuts, relaxation_bounds(op)) == 9);
}

TEST_CASE("master-row penalty matches the printed term") {
  // 100 (-x1 - x2 + s + 1)^2 = 100 (1 - x1 - x2 + 3 s + 2 x1 x2 - 2 x1 s - 2 x2 s)
  const auto m = poc_first_model();
  const int s = m.find(VarRole::MasterSlack, 0)->encoding.offset;
  REQUIRE(m.equalities.size() == 1);
  const auto& eq = m.equalities[0];
  CHECK(eq.weight == 100.0);
  CHECK(eq.rhs == -1.0);
  CHECK(eq.coefficients[0] == -1.0);
  CHECK(eq.coefficients[1] == -1.0);
  CHECK(eq.coefficients[s] == 1.0);
  CHECK(eq.coefficients.cwiseAbs().sum() - 1.0 - 2.0 == 0.0);
  // Q minus the objective diagonal is exactly the expanded penalty.
  Eigen::MatrixXd pen = m.Q;
  pen.diagonal() += m.pi_obj * m.objective;
  CHECK(pen(0, 0) == -100.0);
  CHECK(pen(1, 1) == -100.0);
  CHECK(pen(s, s) == 300.0);
  CHECK(2.0 * pen(0, 1) == 200.0);
  CHECK(2.0 * pen(0, s) == -200.0);
  CHECK(2.0 * pen(1, s) == -200.0);
  CHECK(m.constant == 100.0);
  Eigen::MatrixXd rest = pen;
  for (int i : {0, 1, s})
    for (int j : {0, 1, s}) rest(i, j) = 0.0;
  CHECK(rest.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first-iteration cost equals the hand-expanded polynomial") {
  const auto m = poc_first_model();
  const int t = m.t();
  for (std::uint64_t mask = 0; mask < (1ULL << t); ++mask) {
    const Bits z = bits_of(mask, t);
    const double x1 = z[0], x2 = z[1];
    const double phi = z[2] + 2 * z[3] + 4 * z[4] + 8 * z[5] + 16 * z[6] + 0.5 * z[7];
    const double s = z[8];
    const double expected = -(-15 * x1 - 10 * x2 + phi) + 100 * std::pow(-x1 - x2 + s + 1, 2);
    CHECK(m.cost(z) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(poly(m, z) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(penalty_hamiltonian(m, z) + 0.0 == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK((m.Q - m.Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("decoding") {
  const auto op = proof_of_concept_instance();
  const auto m = poc_first_model();
  const auto zero = decode(m, op, Bits(9, 0));
  CHECK(zero.x == Bits{0, 0});
  CHECK(zero.phi == 0.0);
  CHECK(zero.master_slacks[0] == 0.0);
  CHECK(zero.penalty_residuals[0] == 1.0);
  CHECK_THROWS_AS(decode(m, op, Bits(8, 0)), LengthError);

  const auto [z, cost] = exact_minimize(m);
  const auto best = decode(m, op, z);
  CHECK(best.x == Bits{0, 1});
  CHECK(best.phi == 31.5);
  CHECK(best.objective == 21.5);
  CHECK(best.penalty_residuals.cwiseAbs().maxCoeff() == 0.0);
  CHECK(best.qubo_cost == doctest::Approx(cost));

  for (double phi : {0.0, 0.5, 17.0, 31.5}) {
    for (Bits x : {Bits{0, 1}, Bits{1, 1}}) {
      const Eigen::VectorXd slack = Eigen::VectorXd::Constant(1, x[0] + x[1] - 1.0);
      const Bits enc = encode(m, x, phi, slack, Eigen::VectorXd());
      const auto d = decode(m, op, enc);
      CHECK(d.x == x);
      CHECK(d.phi == phi);
      CHECK(d.master_slacks[0] == slack[0]);
      CHECK(d.penalty_residuals[0] == 0.0);
    }
  }
}

TEST_CASE("degenerate phi bound and cut growth") {
  auto op = proof_of_concept_instance();
  CutPool cuts;
  BoundSet b;
  b.phi_max = 0.6;
  b.master_slack_max = {1.0};
  QuboOptions opt;
  opt.epsilon = 1.0;
  CHECK(qubit_count(op, cuts, b, opt) == 2 + 1);

  BoundSet b2;
  b2.phi_max = 17.0;
  b2.master_slack_max = {1.0};
  const int before = qubit_count(op, cuts, b2, opt);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(8);
  mu[0] = 3.0;
  cuts.add(make_optimality_cut(mu, op));
  b2.optimality_slack_max = {3.0};
  CHECK(qubit_count(op, cuts, b2, opt) == before + 2);
  b2.optimality_slack_max.clear();
  CHECK_THROWS_AS(qubit_count(op, cuts, b2, opt), BoundError);
  b2.optimality_slack_max = {-1.0};
  CHECK_THROWS_AS(qubit_count(op, cuts, b2, opt), BoundError);
  b2.optimality_slack_max = {3.0};
  opt.max_qubits = before;
  CHECK_THROWS_AS(build_qubo(op, cuts, PenaltyWeights{}, b2, opt), SizeError);
}

TEST_CASE("cut pool") {
  const auto op = proof_of_concept_instance();
  const auto sp = solve_subproblem(op, Bits{0, 1});
  CutPool pool;
  const auto& cut = pool.add(make_optimality_cut(sp.mu, op));
  CHECK(cut.constant == doctest::Approx(11.0));
  CHECK(cut.value(Bits{1, 0}) == doctest::Approx(17.0));
  CHECK_THROWS_AS(pool.add(make_optimality_cut(sp.mu, op)), DuplicateCut);
  const auto zero = make_optimality_cut(Eigen::VectorXd::Zero(8), op);
  CHECK(zero.constant == 0.0);
  CHECK(zero.value(Bits{1, 1}) == 0.0);
  CHECK_NOTHROW(pool.add(make_feasibility_cut(sp.mu, op)));
  CHECK(pool.size() == 2);
  CHECK_THROWS_AS(make_optimality_cut(Eigen::VectorXd::Constant(8, -1.0), op), BoundError);
  CHECK_THROWS_AS(make_optimality_cut(Eigen::VectorXd::Zero(3), op), DimensionError);
}

TEST_CASE("qubo interchange roundtrip") {
  const auto m = poc_first_model();
  const auto j = qubo_to_json(m);
  for (const auto& e : j["entries"]) CHECK(e[0].get<int>() <= e[1].get<int>());
  const auto back = qubo_from_json(j);
  CHECK(back.t() == m.t());
  CHECK(back.constant == m.constant);
  CHECK((back.Q - m.Q).cwiseAbs().maxCoeff() == 0.0);
  nlohmann::json bad = {{"t", 2}, {"constant", 0.0}, {"entries", {{1, 0, 1.0}}}};
  CHECK_THROWS_AS(qubo_from_json(bad), ParseError);
}

TEST_CASE("qubit count grows with cuts and bounds tighten encodings") {
  GeneratorConfig cfg;
  cfg.seed = 11;
  cfg.count = 30;
  for (const auto& op : generate_instances(cfg)) {
    auto bounds = relaxation_bounds(op);
    const double loose = phi_max_bound(op, {true, false});
    CHECK(bounds.phi_max <= loose + 1e-9);
    CHECK(size_encoding(bounds.phi_max, 0, 1).bits() <= size_encoding(loose, 0, 1).bits());
    CutPool cuts;
    int last = qubit_count(op, cuts, bounds);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 4; ++k) {
      Bits x(static_cast<std::size_t>(op.n()));
      for (auto& b : x) b = rng() & 1U;
      const auto sp = solve_subproblem(op, x);
      if (sp.status != LpStatus::Optimal) continue;
      try {
        cuts.add(make_optimality_cut(sp.mu, op));
      } catch (const DuplicateCut&) {
        continue;
      }
      add_cut_bounds(bounds, cuts);
      const int now = qubit_count(op, cuts, bounds);
      CHECK(now >= last);
      last = now;
    }
  }
}

namespace {

// Instance with integral data so every cut is exactly representable.
OriginalProblem integral_instance(std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.n_range = {2, 3};
  cfg.p_range = {2, 3};
  cfg.m1_range = {2, 4};
  auto op = generate_instances(cfg).front();
  op.A = op.A.array().round();
  op.G = op.G.array().round();
  op.b = op.b.array().round();
  op.c = op.c.array().round();
  op.h = op.h.array().round();
  return op;
}

}  // namespace

TEST_CASE("QUBO minimum solves the constrained master problem") {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 15 && seed < 200; ++seed) {
    const auto op = integral_instance(seed);
    std::mt19937_64 rng(seed);
    CutPool cuts;
    const int n_cuts = static_cast<int>(rng() % 3);
    for (int k = 0; k < n_cuts; ++k) {
      Eigen::VectorXd mu(op.m1());
      for (int i = 0; i < op.m1(); ++i) mu[i] = static_cast<double>(rng() % 3);
      try {
        cuts.add(make_optimality_cut(mu, op));
      } catch (const DuplicateCut&) {
      }
    }
    BoundSet bounds;
    try {
      bounds = relaxation_bounds(op);
    } catch (const Error&) {
      continue;
    }
    add_cut_bounds(bounds, cuts);
    QuboOptions opt;
    opt.epsilon = 0.5;
    if (qubit_count(op, cuts, bounds, opt) > 14) continue;
    const auto model = build_qubo(op, cuts, PenaltyWeights{}, bounds, opt);
    ++checked;
    const auto phi_enc = model.find(VarRole::Phi)->encoding;

    // Brute force over x and the phi grid.
    double best = -1e300;
    for (std::uint64_t mask = 0; mask < (1ULL << op.n()); ++mask) {
      Bits x = bits_of(mask, op.n());
      if (!master_rows_hold(op, x)) continue;
      for (double phi = 0.0; phi <= phi_enc.max_value() + 1e-12; phi += 0.5) {
        bool ok = true;
        for (const auto& cut : cuts.optimality()) ok = ok && phi <= cut.value(x) + 1e-9;
        if (ok) best = std::max(best, op.c.dot(to_vector(x)) + phi);
      }
    }
    const auto [z, cost] = exact_minimize(model);
    const auto d = decode(model, op, z);
    CHECK(d.penalty_residuals.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(d.objective == doctest::Approx(best));
    CHECK(cost == doctest::Approx(-best));
  }
  CHECK(checked >= 10);
}

TEST_CASE("default penalties dominate on first-iteration models") {
  GeneratorConfig cfg;
  cfg.seed = 17;
  cfg.count = 40;
  int checked = 0;
  for (const auto& op : generate_instances(cfg)) {
    CutPool cuts;
    auto bounds = relaxation_bounds(op);
    if (qubit_count(op, cuts, bounds) > 14) continue;
    const auto model = build_qubo(op, cuts, PenaltyWeights{}, bounds);
    const auto [z, cost] = exact_minimize(model);
    const auto d = decode(model, op, z);
    CHECK(d.penalty_residuals.cwiseAbs().maxCoeff() == 0.0);
    ++checked;
  }
  CHECK(checked > 20);
}
