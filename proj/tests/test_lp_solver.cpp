#include <random>

#include "benders_atoms/errors.hpp"
#include "benders_atoms/lp_solver.hpp"
#include "doctest.h"
#include "lp_oracle.hpp"

using namespace benders_atoms;

namespace {

LinearProgram single(Sense sense, double c, double lo, double hi) {
  LinearProgram lp;
  lp.sense = sense;
  lp.objective = Eigen::VectorXd::Constant(1, c);
  lp.constraints = Eigen::MatrixXd::Zero(0, 1);
  lp.rhs = Eigen::VectorXd::Zero(0);
  lp.lower = Eigen::VectorXd::Constant(1, lo);
  lp.upper = Eigen::VectorXd::Constant(1, hi);
  return lp;
}

void check_certificates(const LinearProgram& lp, const LpResult& res) {
  if (res.status == LpStatus::Optimal) {
    CHECK(primal_residual(lp, res.primal) <= 1e-7);
    CHECK(dual_residual(lp, res.duals) <= 1e-7);
    CHECK(std::abs(res.objective - dual_objective(lp, res.duals)) <= 1e-6 * (1.0 + std::abs(res.objective)));
  } else if (res.status == LpStatus::Infeasible) {
    CHECK(farkas_margin(lp, res.ray) > 1e-8);
  } else {
    CHECK(ray_improvement(lp, res.ray) >= 1e-8);
  }
}

}  // namespace

TEST_CASE("subproblem values on the proof-of-concept instance") {
  const auto op = proof_of_concept_instance();
  auto a = solve_subproblem(op, Bits{0, 1});
  REQUIRE(a.status == LpStatus::Optimal);
  CHECK(a.value == doctest::Approx(11.0));
  CHECK((a.y - Eigen::Vector4d(0, 0, 1, 1)).norm() < 1e-9);
  auto b = solve_subproblem(op, Bits{1, 0});
  REQUIRE(b.status == LpStatus::Optimal);
  CHECK(b.value == doctest::Approx(17.0));
  CHECK((b.y - Eigen::Vector4d(1, 1, 0, 0)).norm() < 1e-9);
  const Eigen::VectorXd slack = op.b - op.A * Eigen::Vector2d(1, 0);
  CHECK(slack.dot(b.mu) == doctest::Approx(17.0));
  CHECK(b.mu.minCoeff() >= 0.0);
  const Eigen::VectorXd slack_a = op.b - op.A * Eigen::Vector2d(0, 1);
  CHECK(slack_a.dot(a.mu) == doctest::Approx(11.0));
  // The dual is a valid Benders cut: it overestimates f at every other x.
  CHECK((op.b - op.A * Eigen::Vector2d(1, 0)).dot(a.mu) >= 17.0 - 1e-9);
  CHECK((op.b - op.A * Eigen::Vector2d(1, 1)).dot(a.mu) >= 17.0 - 1e-9);
}

TEST_CASE("pinned variable") {
  LinearProgram lp;
  lp.sense = Sense::Max;
  lp.objective = Eigen::VectorXd::Ones(1);
  lp.constraints = Eigen::MatrixXd::Ones(2, 1);
  lp.rhs = Eigen::VectorXd::Zero(2);
  lp.row_senses = {RowSense::LE, RowSense::GE};
  lp.lower = Eigen::VectorXd::Constant(1, -kInf);
  lp.upper = Eigen::VectorXd::Constant(1, kInf);
  const auto res = solve(lp);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.objective == 0.0);
  check_certificates(lp, res);
}

TEST_CASE("single violated linking row gives a Farkas ray") {
  OriginalProblem op;
  op.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  op.G = Eigen::MatrixXd::Zero(1, 1);
  op.b = Eigen::VectorXd::Constant(1, -1.0);
  op.B = Eigen::MatrixXd::Zero(0, 1);
  op.b_prime = Eigen::VectorXd::Zero(0);
  op.c = Eigen::VectorXd::Zero(1);
  op.h = Eigen::VectorXd::Ones(1);
  const auto sp = solve_subproblem(op, Bits{0});
  REQUIRE(sp.status == LpStatus::Infeasible);
  CHECK(sp.ray[0] == doctest::Approx(1.0));
  const Eigen::VectorXd slack = op.b - op.A * Eigen::VectorXd::Zero(1);
  CHECK(sp.ray.dot(slack) == doctest::Approx(-1.0));
  CHECK((op.G.transpose() * sp.ray).minCoeff() >= 0.0);
  CHECK(solve_subproblem(op, Bits{1}).status == LpStatus::Unbounded);
}

TEST_CASE("free improving direction is unbounded") {
  OriginalProblem op;
  op.A = Eigen::MatrixXd::Zero(1, 1);
  op.G = Eigen::MatrixXd::Zero(1, 1);
  op.b = Eigen::VectorXd::Ones(1);
  op.B = Eigen::MatrixXd::Zero(0, 1);
  op.b_prime = Eigen::VectorXd::Zero(0);
  op.c = Eigen::VectorXd::Zero(1);
  op.h = Eigen::VectorXd::Ones(1);
  CHECK(solve_subproblem(op, Bits{0}).status == LpStatus::Unbounded);

  LinearProgram lp = single(Sense::Min, 1.0, -kInf, 3.0);
  const auto res = solve(lp);
  REQUIRE(res.status == LpStatus::Unbounded);
  check_certificates(lp, res);
  CHECK(res.ray[0] < 0.0);
}

TEST_CASE("bounded single variables") {
  auto r1 = solve(single(Sense::Max, 2.0, -1.0, 4.0));
  CHECK(r1.primal[0] == 4.0);
  auto r2 = solve(single(Sense::Min, 2.0, -1.0, 4.0));
  CHECK(r2.primal[0] == -1.0);
  auto r3 = solve(single(Sense::Max, -1.0, -kInf, 2.5));
  CHECK(r3.status == LpStatus::Unbounded);
  auto r4 = solve(single(Sense::Max, 1.0, -kInf, 2.5));
  CHECK(r4.primal[0] == 2.5);
  auto r5 = solve(single(Sense::Max, 0.0, -kInf, kInf));
  CHECK(r5.status == LpStatus::Optimal);
}

TEST_CASE("invalid LPs are rejected") {
  auto lp = single(Sense::Max, 1.0, 2.0, 1.0);
  CHECK_THROWS_AS(solve(lp), DimensionError);
  auto lp2 = single(Sense::Max, 1.0, 0.0, 1.0);
  lp2.rhs = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(solve(lp2), DimensionError);
}

TEST_CASE("relaxation bounds on the proof-of-concept instance") {
  const auto op = proof_of_concept_instance();
  CHECK(phi_max_bound(op) == doctest::Approx(17.0));
  CHECK(phi_min_bound(op) == doctest::Approx(0.0));
  CHECK(slack_max_bound(op, 0) == doctest::Approx(1.0));
  CHECK(phi_max_bound(op, {true, false}) >= phi_max_bound(op) - 1e-9);
  CHECK(slack_max_bound(op, 0, {false, false}) >= slack_max_bound(op, 0) - 1e-9);
  CHECK_THROWS_AS(slack_max_bound(op, 1), DimensionError);
}

TEST_CASE("degenerate relaxation bounds") {
  auto op = proof_of_concept_instance();
  op.h.setZero();
  CHECK(phi_max_bound(op) == 0.0);
  op.B.setZero();
  op.b_prime.setZero();
  CHECK(slack_max_bound(op, 0) == 0.0);
  op.h = Eigen::Vector4d(1, 0, 0, 0);
  op.G.col(0).setZero();
  CHECK_THROWS_AS(phi_max_bound(op), RelaxationUnbounded);
  auto bad = proof_of_concept_instance();
  bad.b_prime[0] = -3.0;
  CHECK_THROWS_AS(phi_max_bound(bad), RelaxationInfeasible);
}

TEST_CASE("random LPs carry valid certificates") {
  std::mt19937_64 rng(20240601);
  int counts[3] = {0, 0, 0};
  for (int k = 0; k < 300; ++k) {
    const int rows = 1 + static_cast<int>(rng() % 8);
    const int cols = 1 + static_cast<int>(rng() % 6);
    const auto lp = lp_oracle::random_lp(rng, rows, cols, k % 2 == 0);
    const auto res = solve(lp);
    ++counts[static_cast<int>(res.status)];
    check_certificates(lp, res);
    if (k % 2 == 0) {
      const auto vertex = lp_oracle::best_vertex(lp);
      if (res.status == LpStatus::Infeasible) CHECK_FALSE(vertex.has_value());
      if (res.status == LpStatus::Optimal) {
        REQUIRE(vertex.has_value());
        CHECK(res.objective == doctest::Approx(*vertex).epsilon(1e-7));
      }
    }
    const auto again = solve(lp);
    CHECK(again.iterations == res.iterations);
    CHECK(again.objective == res.objective);
  }
  MESSAGE("optimal=" << counts[0] << " infeasible=" << counts[1] << " unbounded=" << counts[2]);
  CHECK(counts[0] > 20);
  CHECK(counts[1] > 20);
}
