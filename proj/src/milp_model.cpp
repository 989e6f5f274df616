#include "benders_atoms/milp_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "benders_atoms/errors.hpp"
#include "benders_atoms/lp_solver.hpp"

namespace benders_atoms {

namespace {

void check_rows(const Eigen::MatrixXd& M, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << M.rows() << "x" << M.cols();
    throw DimensionError(os.str());
  }
}

Eigen::VectorXd json_vector(const nlohmann::json& j, const char* key) {
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ParseError(std::string("'") + key + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ParseError(std::string("'") + key + "' must hold numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

// Rows may be ragged in the file; a ragged matrix is a dimension error, not a parse error.
Eigen::MatrixXd json_matrix(const nlohmann::json& j, const char* key, Eigen::Index expected_cols) {
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ParseError(std::string("'") + key + "' must be an array of rows");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(arr.size()), expected_cols);
  for (std::size_t r = 0; r < arr.size(); ++r) {
    const auto& row = arr[r];
    if (!row.is_array()) throw ParseError(std::string("'") + key + "' rows must be arrays");
    if (static_cast<Eigen::Index>(row.size()) != expected_cols) {
      std::ostringstream os;
      os << key << " row " << r << " has " << row.size() << " entries, expected " << expected_cols;
      throw DimensionError(os.str());
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!row[c].is_number()) throw ParseError(std::string("'") + key + "' must hold numbers");
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return M;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
  auto out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

double round1(double v) {
  double r = std::round(v * 10.0) / 10.0;
  return r == 0.0 ? 0.0 : r;  // no negative zero in files
}

int draw_int(std::mt19937_64& rng, IntRange range) {
  const auto span = static_cast<std::uint64_t>(range.hi - range.lo + 1);
  return range.lo + static_cast<int>(rng() % span);
}

}  // namespace

void OriginalProblem::validate() const {
  const Eigen::Index n_ = c.size(), p_ = h.size(), m1_ = b.size(), m2_ = b_prime.size();
  if (n_ < 1) throw DimensionError("at least one binary variable is required");
  check_rows(A, m1_, n_, "A");
  check_rows(G, m1_, p_, "G");
  check_rows(B, m2_, n_, "B");
  auto finite = [](const auto& M) { return M.allFinite(); };
  if (!(finite(A) && finite(G) && finite(b) && finite(B) && finite(b_prime) && finite(c) && finite(h))) {
    throw ParseError("instance data must be finite");
  }
}

bool OriginalProblem::operator==(const OriginalProblem& o) const {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || x == y);
  };
  return same(A, o.A) && same(G, o.G) && same(b, o.b) && same(B, o.B) && same(b_prime, o.b_prime) &&
         same(c, o.c) && same(h, o.h);
}

double constraint_violation(const OriginalProblem& op, const Bits& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd xv = to_vector(x);
  double worst = 0.0;
  if (op.m1() > 0) worst = std::max(worst, (op.A * xv + op.G * y - op.b).maxCoeff());
  if (op.m2() > 0) worst = std::max(worst, (op.B * xv - op.b_prime).maxCoeff());
  if (y.size() > 0) worst = std::max(worst, -y.minCoeff());
  return worst;
}

bool master_rows_hold(const OriginalProblem& op, const Bits& x, double tol) {
  if (op.m2() == 0) return true;
  return (op.B * to_vector(x) - op.b_prime).maxCoeff() <= tol;
}

std::vector<OriginalProblem> generate_instances(const GeneratorConfig& cfg) {
  auto check = [](IntRange r, const char* name) {
    if (r.lo > r.hi) throw ConfigError(std::string(name) + " range is empty");
  };
  check(cfg.n_range, "n");
  check(cfg.p_range, "p");
  check(cfg.m1_range, "m1");
  if (cfg.n_range.lo < 2) throw ConfigError("n must be at least 2 so that 0 < b' < n is possible");
  if (cfg.p_range.lo < 1 || cfg.m1_range.lo < 0) throw ConfigError("p must be >= 1 and m1 >= 0");
  if (cfg.count < 0) throw ConfigError("count must be nonnegative");

  std::mt19937_64 rng(cfg.seed);
  auto uni = [&rng](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };

  std::vector<OriginalProblem> out;
  out.reserve(static_cast<std::size_t>(cfg.count));
  for (int k = 0; k < cfg.count; ++k) {
    const int n = draw_int(rng, cfg.n_range);
    const int p = draw_int(rng, cfg.p_range);
    const int m1 = draw_int(rng, cfg.m1_range);
    OriginalProblem op;
    op.A.resize(m1, n);
    op.G.resize(m1, p);
    op.b.resize(m1);
    for (int r = 0; r < m1; ++r) {
      for (int j = 0; j < n; ++j) op.A(r, j) = round1(-uni(0.0, 5.0));
      for (int j = 0; j < p; ++j) op.G(r, j) = round1(uni(0.0, 5.0));
      op.b[r] = round1(uni(1.0, 10.0));
    }
    op.B = Eigen::MatrixXd::Ones(1, n);
    op.b_prime.resize(1);
    op.b_prime[0] = static_cast<double>(draw_int(rng, IntRange{1, n - 1}));
    op.c.resize(n);
    for (int j = 0; j < n; ++j) op.c[j] = round1(uni(0.0, 10.0));
    op.h.resize(p);
    for (int j = 0; j < p; ++j) op.h[j] = round1(uni(1.0, 10.0));
    out.push_back(std::move(op));
  }
  return out;
}

MilpSolution brute_force_solve(const OriginalProblem& op) {
  op.validate();
  const int n = op.n();
  if (n > kBruteForceMaxBinaries) {
    throw SizeError("brute force limited to " + std::to_string(kBruteForceMaxBinaries) + " binaries");
  }
  MilpSolution best;
  best.status = SolveStatus::Infeasible;
  bool found = false;
  Bits x(static_cast<std::size_t>(n));
  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    // x[0] is the most significant bit, so masks run in lexicographic order.
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (mask >> (n - 1 - i)) & 1U;
    if (!master_rows_hold(op, x, 1e-9)) continue;
    const auto sp = solve_subproblem(op, x, false);
    if (sp.status == LpStatus::Unbounded) {
      MilpSolution unb;
      unb.status = SolveStatus::Unbounded;
      unb.x = x;
      unb.objective = std::numeric_limits<double>::infinity();
      return unb;
    }
    if (sp.status != LpStatus::Optimal) continue;
    const double obj = op.c.dot(to_vector(x)) + op.h.dot(sp.y);
    if (!found || obj > best.objective + 1e-9) {
      found = true;
      best.x = x;
      best.y = sp.y;
      best.objective = obj;
      best.status = SolveStatus::Optimal;
    }
  }
  return best;
}

OriginalProblem instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  static constexpr const char* keys[] = {"n", "p", "m1", "m2", "A", "G", "b", "B", "b_prime", "c", "h"};
  for (const char* k : keys) {
    if (!j.contains(k)) throw ParseError(std::string("missing key '") + k + "'");
  }
  auto get_count = [&j](const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ParseError(std::string("'") + key + "' must be a nonnegative integer");
    }
    return static_cast<Eigen::Index>(v.get<long long>());
  };
  const auto n = get_count("n"), p = get_count("p"), m1 = get_count("m1"), m2 = get_count("m2");
  OriginalProblem op;
  op.A = json_matrix(j, "A", n);
  op.G = json_matrix(j, "G", p);
  op.b = json_vector(j, "b");
  op.B = json_matrix(j, "B", n);
  op.b_prime = json_vector(j, "b_prime");
  op.c = json_vector(j, "c");
  op.h = json_vector(j, "h");
  if (op.A.rows() != m1 || op.G.rows() != m1 || op.b.size() != m1) {
    throw DimensionError("linking rows disagree with m1 = " + std::to_string(m1));
  }
  if (op.B.rows() != m2 || op.b_prime.size() != m2) {
    throw DimensionError("master rows disagree with m2 = " + std::to_string(m2));
  }
  if (op.c.size() != n || op.h.size() != p) throw DimensionError("c or h length disagrees with n, p");
  op.validate();
  return op;
}

nlohmann::json instance_to_json(const OriginalProblem& op) {
  nlohmann::json j;
  j["n"] = op.n();
  j["p"] = op.p();
  j["m1"] = op.m1();
  j["m2"] = op.m2();
  j["A"] = matrix_json(op.A);
  j["G"] = matrix_json(op.G);
  j["b"] = vector_json(op.b);
  j["B"] = matrix_json(op.B);
  j["b_prime"] = vector_json(op.b_prime);
  j["c"] = vector_json(op.c);
  j["h"] = vector_json(op.h);
  return j;
}

OriginalProblem load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed instance " + path.string() + ": " + e.what());
  }
  try {
    return instance_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed instance " + path.string() + ": " + e.what());
  }
}

void save_instance(const OriginalProblem& op, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << instance_to_json(op).dump(1) << '\n';
}

OriginalProblem proof_of_concept_instance() {
  OriginalProblem op;
  op.A.resize(8, 2);
  op.A << 0, 0, 0, 0, 0, 0, 0, 0, -1, 0, -1, 0, 0, -1, 0, -1;
  op.G.resize(8, 4);
  op.G << 1, 0, 1, 0,  //
      1, 0, 0, 1,      //
      0, 1, 1, 0,      //
      0, 1, 0, 1,      //
      1, 0, 0, 0,      //
      0, 1, 0, 0,      //
      0, 0, 1, 0,      //
      0, 0, 0, 1;
  op.b.resize(8);
  op.b << 1, 1, 1, 1, 0, 0, 0, 0;
  op.B.resize(1, 2);
  op.B << -1, -1;
  op.b_prime.resize(1);
  op.b_prime << -1;
  op.c.resize(2);
  op.c << -15, -10;
  op.h.resize(4);
  op.h << 8, 9, 5, 6;
  return op;
}

}  // namespace benders_atoms
