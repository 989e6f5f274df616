#include <fstream>
#include <sstream>

#include "benders_atoms/bench.hpp"
#include "doctest.h"

using namespace benders_atoms;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BenchConfig small_suite(int count) {
  BenchConfig cfg;
  cfg.generator.count = count;
  cfg.generator.seed = 5;
  cfg.generator.n_range = {2, 4};
  cfg.solver.shots = 100;
  return cfg;
}

}  // namespace

TEST_CASE("confidence intervals") {
  CHECK(mean_ci95({}).first == 0.0);
  CHECK(mean_ci95({3.0}) == std::pair<double, double>{3.0, 0.0});
  const auto [m, h] = mean_ci95({1.0, 3.0});
  CHECK(m == 2.0);
  CHECK(h == doctest::Approx(1.96 * std::sqrt(2.0) / std::sqrt(2.0)));
}

TEST_CASE("thread count") {
  CHECK(bench_threads(3) == 3);
  CHECK(bench_threads(0) >= 1);
}

TEST_CASE("suite over exact and annealing backends") {
  const auto records = run_bench(small_suite(20));
  REQUIRE(records.size() == 40);
  const auto aggs = aggregate(records);
  double exact_feasible = 0, anneal_feasible = 0, exact_n = 0, anneal_n = 0;
  for (const auto& a : aggs) {
    CHECK(a.feasible_pct >= 0.0);
    CHECK(a.feasible_pct <= 100.0);
    (a.backend == SamplerKind::Exact ? exact_feasible : anneal_feasible) += a.feasible_pct * a.instances;
    (a.backend == SamplerKind::Exact ? exact_n : anneal_n) += a.instances;
  }
  CHECK(exact_feasible / exact_n == doctest::Approx(100.0));
  CHECK(anneal_feasible / anneal_n <= 100.0);
  for (const auto& r : records) {
    CHECK(r.instance == records[(&r - records.data()) / 2 * 2].instance);
    if (r.backend == SamplerKind::Exact) {
      REQUIRE(r.gap.has_value());
      CHECK(std::abs(*r.gap) * std::abs(*r.optimum) <= 0.5);
    }
  }
}

TEST_CASE("singleton aggregate equals its record") {
  auto cfg = small_suite(1);
  cfg.backends = {SamplerKind::Exact};
  const auto records = run_bench(cfg);
  REQUIRE(records.size() == 1);
  const auto aggs = aggregate(records);
  REQUIRE(aggs.size() == 1);
  CHECK(aggs[0].instances == 1);
  CHECK(aggs[0].qubits == records[0].qubits);
  CHECK(aggs[0].feasible_pct == 100.0);
  CHECK(aggs[0].mean_iterations == records[0].iterations);
  CHECK(aggs[0].mean_gap == std::abs(*records[0].gap));
  CHECK(aggs[0].gap_ci == 0.0);
}

TEST_CASE("repeated runs write identical files") {
  auto cfg = small_suite(6);
  const auto dir = std::filesystem::temp_directory_path();
  cfg.threads = 1;
  const auto a = run_bench(cfg);
  cfg.threads = 3;
  const auto b = run_bench(cfg);
  write_records_csv(a, dir / "ba_rec_a.csv");
  write_records_csv(b, dir / "ba_rec_b.csv");
  write_aggregates_csv(aggregate(a), dir / "ba_agg_a.csv");
  write_aggregates_csv(aggregate(b), dir / "ba_agg_b.csv");
  CHECK(slurp(dir / "ba_rec_a.csv") == slurp(dir / "ba_rec_b.csv"));
  CHECK(slurp(dir / "ba_agg_a.csv") == slurp(dir / "ba_agg_b.csv"));
  CHECK(slurp(dir / "ba_rec_a.csv").rfind(kRecordsHeader, 0) == 0);
}
