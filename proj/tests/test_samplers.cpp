#include <random>

#include "benders_atoms/errors.hpp"
#include "benders_atoms/lp_solver.hpp"
#include "benders_atoms/samplers.hpp"
#include "doctest.h"

using namespace benders_atoms;

namespace {

Bits bits_of(std::uint64_t mask, int t) {
  // position 0 most significant, so ascending masks are lexicographic
  Bits z(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) z[i] = (mask >> (t - 1 - i)) & 1U;
  return z;
}

double poly(const Eigen::MatrixXd& Q, double c, const Bits& z) {
  double s = c;
  for (int i = 0; i < Q.rows(); ++i)
    for (int j = 0; j < Q.rows(); ++j) s += Q(i, j) * z[i] * z[j];
  return s;
}

std::pair<Bits, double> oracle_min(const QuboModel& m) {
  Bits best;
  double best_cost = 0.0;
  for (std::uint64_t mask = 0; mask < (1ULL << m.t()); ++mask) {
    const Bits z = bits_of(mask, m.t());
    const double c = poly(m.Q, m.constant, z);
    if (best.empty() || c < best_cost - 1e-9 * (1 + std::abs(best_cost))) {
      best = z;
      best_cost = c;
    }
  }
  return {best, best_cost};
}

QuboModel random_model(std::mt19937_64& rng, int t, bool integer) {
  Eigen::MatrixXd Q(t, t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) {
      const double v = static_cast<double>(static_cast<int>(rng() % 9) - 4);
      Q(i, j) = integer ? v : v + static_cast<double>(rng() % 1000) / 1000.0;
    }
  return qubo_from_matrix(Q, 1.5);
}

}  // namespace

TEST_CASE("exact minimum of flat and diagonal models") {
  auto flat = qubo_from_matrix(Eigen::MatrixXd::Zero(5, 5), 2.0);
  auto [z0, c0] = exact_minimize(flat);
  CHECK(z0 == Bits(5, 0));
  CHECK(c0 == 2.0);
  auto diag = qubo_from_matrix(Eigen::MatrixXd::Identity(6, 6));
  CHECK(exact_minimize(diag).first == Bits(6, 0));
  auto one = qubo_from_matrix(Eigen::MatrixXd::Constant(1, 1, -1.0), 0.25);
  auto [z1, c1] = exact_minimize(one);
  CHECK(z1 == Bits{1});
  CHECK(c1 == -0.75);
  CHECK_THROWS_AS(exact_minimize(qubo_from_matrix(Eigen::MatrixXd::Zero(25, 25))), SizeError);
}

TEST_CASE("exact minimum agrees with plain enumeration") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 40; ++k) {
    const int t = 1 + static_cast<int>(rng() % 10);
    const auto m = random_model(rng, t, k % 2 == 0);
    const auto [z, c] = exact_minimize(m);
    const auto [zo, co] = oracle_min(m);
    CHECK(c == doctest::Approx(co));
    CHECK(z == zo);
  }
}

TEST_CASE("exact minimum on layout models agrees with plain enumeration") {
  GeneratorConfig cfg;
  cfg.seed = 23;
  cfg.count = 30;
  int checked = 0;
  for (const auto& op : generate_instances(cfg)) {
    CutPool cuts;
    auto bounds = relaxation_bounds(op);
    const auto sp = solve_subproblem(op, Bits(static_cast<std::size_t>(op.n()), 0));
    if (sp.status == LpStatus::Optimal) cuts.add(make_optimality_cut(sp.mu, op));
    add_cut_bounds(bounds, cuts);
    QuboOptions opt;
    opt.slack_extra_bits = 1;
    if (qubit_count(op, cuts, bounds, opt) > 20) continue;
    const auto model = build_qubo(op, cuts, PenaltyWeights{}, bounds, opt);
    const auto [z, c] = exact_minimize(model);
    const auto [zo, co] = oracle_min(model);
    CHECK(c == doctest::Approx(co));
    CHECK(z == zo);
    if (++checked == 6) break;
  }
  CHECK(checked >= 3);
}

TEST_CASE("exact sampler returns the minimizer for every shot") {
  std::mt19937_64 rng(8);
  const auto m = random_model(rng, 6, true);
  SamplerConfig cfg;
  cfg.shots = 37;
  const auto set = ExactSampler().sample(m, cfg);
  REQUIRE(set.entries.size() == 1);
  CHECK(set.best().multiplicity == 37);
  CHECK(set.total_shots == 37);
  CHECK(set.best().cost == doctest::Approx(oracle_min(m).second));
  cfg.shots = 0;
  CHECK_THROWS_AS(ExactSampler().sample(m, cfg), ConfigError);
}

TEST_CASE("second proof-of-concept master problem") {
  const auto op = proof_of_concept_instance();
  CutPool cuts;
  cuts.add(make_optimality_cut(solve_subproblem(op, Bits{0, 1}).mu, op));
  auto bounds = relaxation_bounds(op);
  add_cut_bounds(bounds, cuts);
  const auto model = build_qubo(op, cuts, PenaltyWeights{}, bounds);
  const auto [z, c] = exact_minimize(model);
  const auto d = decode(model, op, z);
  CHECK(d.x == Bits{1, 0});
  CHECK(d.phi == 17.0);
  CHECK(d.objective == 2.0);
  CHECK(d.penalty_residuals.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("annealing finds a dominant bit") {
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(4, 4);
  Q(2, 2) = -10.0;
  Q(0, 0) = 0.5;
  Q(1, 3) = Q(3, 1) = 0.25;
  const auto m = qubo_from_matrix(Q);
  SamplerConfig cfg;
  cfg.shots = 100;
  cfg.seed = 3;
  const auto set = anneal(m, cfg);
  int with_bit = 0;
  for (const auto& e : set.entries) {
    if (e.bits[2]) with_bit += e.multiplicity;
    CHECK(e.cost == doctest::Approx(poly(m.Q, m.constant, e.bits)).epsilon(1e-12));
    CHECK(e.cost >= exact_minimize(m).second - 1e-9);
  }
  CHECK(with_bit >= 90);
  CHECK(set.best().bits == exact_minimize(m).first);
}

TEST_CASE("zero sweeps return uniform initial states") {
  const auto m = qubo_from_matrix(Eigen::MatrixXd::Constant(3, 3, -1.0));
  SamplerConfig cfg;
  cfg.shots = 4000;
  cfg.anneal.sweeps = 0;
  const auto set = anneal(m, cfg);
  int total = 0;
  for (const auto& e : set.entries) {
    total += e.multiplicity;
    CHECK(e.multiplicity / 4000.0 == doctest::Approx(0.125).epsilon(0.25));
  }
  CHECK(total == 4000);
  CHECK(set.entries.size() == 8);
  for (std::size_t i = 1; i < set.entries.size(); ++i) {
    const auto& a = set.entries[i - 1];
    const auto& b = set.entries[i];
    CHECK((a.cost < b.cost || (a.cost == b.cost && lex_less(a.bits, b.bits))));
  }
}

TEST_CASE("annealing is deterministic per seed") {
  std::mt19937_64 rng(12);
  const auto m = random_model(rng, 8, false);
  SamplerConfig cfg;
  cfg.shots = 50;
  cfg.seed = 77;
  const auto a = anneal(m, cfg);
  const auto b = anneal(m, cfg);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].bits == b.entries[i].bits);
    CHECK(a.entries[i].multiplicity == b.entries[i].multiplicity);
  }
}

TEST_CASE("annealing converges on two-bit models") {
  std::mt19937_64 rng(99);
  int models = 0;
  while (models < 20) {
    Eigen::MatrixXd Q(2, 2);
    Q(0, 0) = static_cast<int>(rng() % 11) - 5;
    Q(1, 1) = static_cast<int>(rng() % 11) - 5;
    Q(0, 1) = Q(1, 0) = (static_cast<int>(rng() % 11) - 5) / 2.0;
    const auto m = qubo_from_matrix(Q);
    std::vector<double> costs;
    for (std::uint64_t k = 0; k < 4; ++k) costs.push_back(m.cost(bits_of(k, 2)));
    auto sorted = costs;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[1] - sorted[0] < 1.0) continue;
    ++models;
    SamplerConfig cfg;
    cfg.shots = 100;
    cfg.seed = models;
    const auto set = anneal(m, cfg);
    const Bits target = exact_minimize(m).first;
    int hits = 0;
    for (const auto& e : set.entries) {
      if (e.bits == target) hits += e.multiplicity;
    }
    CHECK(hits >= 95);
  }
}
