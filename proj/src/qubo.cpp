#include "benders_atoms/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "benders_atoms/errors.hpp"
#include "benders_atoms/lp_solver.hpp"

namespace benders_atoms {

namespace {

constexpr double kSnap = 1e-9;

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) <= kSnap * (1.0 + std::abs(v)) ? r : v;
}

bool integral(double v) { return std::abs(v - std::round(v)) <= kSnap * (1.0 + std::abs(v)); }

bool integral(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!integral(v[i])) return false;
  }
  return true;
}

Eigen::VectorXd snapped(const Eigen::VectorXd& v) { return v.unaryExpr([](double a) { return snap(a); }); }

// ilogb(v) + 1 for v >= 1: the bit count of floor(v).
int integer_bits(double v) { return v >= 1.0 ? std::ilogb(v) + 1 : 0; }

struct Plan {
  std::vector<LayoutEntry> layout;
  int t = 0;
  int D = 0;
};

void append(Plan& plan, VarRole role, int index, BinaryEncoding enc) {
  enc.offset = plan.t;
  plan.t += enc.bits();
  plan.layout.push_back({role, index, enc});
}

Plan plan_layout(const OriginalProblem& op, const CutPool& cuts, const BoundSet& bounds,
                 const QuboOptions& options) {
  op.validate();
  Plan plan;
  plan.D = fractional_bits(options.epsilon);
  const int extra = plan.D + std::max(0, options.slack_extra_bits);
  if (!std::isfinite(bounds.phi_max) || !std::isfinite(bounds.phi_min) || bounds.phi_min > bounds.phi_max) {
    throw BoundError("phi bounds must be finite with phi_min <= phi_max");
  }
  auto check = [](const std::vector<double>& v, std::size_t need, const char* what) {
    if (v.size() < need) throw BoundError(std::string("missing ") + what + " slack bound");
    for (std::size_t i = 0; i < need; ++i) {
      if (!(v[i] >= 0.0) || !std::isfinite(v[i])) throw BoundError(std::string("negative or invalid ") + what + " slack bound");
    }
  };
  check(bounds.master_slack_max, static_cast<std::size_t>(op.m2()), "master");
  check(bounds.optimality_slack_max, cuts.optimality().size(), "optimality-cut");
  check(bounds.feasibility_slack_max, cuts.feasibility().size(), "feasibility-cut");

  for (int j = 0; j < op.n(); ++j) append(plan, VarRole::XBit, j, BinaryEncoding{1, 0, 0, 0});
  append(plan, VarRole::Phi, 0, size_encoding(bounds.phi_max, bounds.phi_min, plan.D));
  for (int k = 0; k < op.m2(); ++k) {
    const bool whole = integral(Eigen::VectorXd(op.B.row(k).transpose())) && integral(op.b_prime[k]);
    append(plan, VarRole::MasterSlack, k, size_encoding(bounds.master_slack_max[k], 0.0, whole ? 0 : extra));
  }
  for (std::size_t k = 0; k < cuts.optimality().size(); ++k) {
    const auto& cut = cuts.optimality()[k];
    const bool whole = integral(cut.coefficients) && integral(cut.constant);
    append(plan, VarRole::OptimalitySlack, static_cast<int>(k),
           size_encoding(bounds.optimality_slack_max[k], 0.0, whole ? plan.D : extra));
  }
  for (std::size_t k = 0; k < cuts.feasibility().size(); ++k) {
    const auto& cut = cuts.feasibility()[k];
    const bool whole = integral(cut.coefficients) && integral(cut.constant);
    append(plan, VarRole::FeasibilitySlack, static_cast<int>(k),
           size_encoding(bounds.feasibility_slack_max[k], 0.0, whole ? 0 : extra));
  }
  return plan;
}

void add_encoding(Eigen::VectorXd& row, const BinaryEncoding& enc, double scale = 1.0) {
  for (int i = 0; i < enc.bits(); ++i) row[enc.offset + i] += scale * enc.weight(i);
}

Bits slice(const Bits& z, const BinaryEncoding& enc) {
  return Bits(z.begin() + enc.offset, z.begin() + enc.offset + enc.bits());
}

void write_value(Bits& z, const BinaryEncoding& enc, double v) {
  v = std::clamp(v, enc.min_value(), enc.max_value());
  long long neg = 0;
  if (v < 0.0) neg = static_cast<long long>(std::ceil(-v - 1e-12));
  const double positive = v + static_cast<double>(neg);
  const auto grid = static_cast<long long>(std::floor(positive * std::ldexp(1.0, enc.D) + 1e-9));
  const long long whole = grid >> enc.D;
  const long long frac = grid & ((1LL << enc.D) - 1);
  for (int i = 0; i < enc.P; ++i) z[enc.offset + i] = (whole >> i) & 1;
  for (int j = 1; j <= enc.D; ++j) z[enc.offset + enc.P + j - 1] = (frac >> (enc.D - j)) & 1;
  for (int k = 1; k <= enc.N; ++k) z[enc.offset + enc.P + enc.D + k - 1] = (neg >> (k - 1)) & 1;
}

}  // namespace

double BinaryEncoding::weight(int i) const {
  if (i < P) return std::ldexp(1.0, i);
  if (i < P + D) return std::ldexp(1.0, -(i - P + 1));
  return -std::ldexp(1.0, i - P - D);
}

double BinaryEncoding::value(const Bits& z) const {
  if (static_cast<int>(z.size()) != bits()) throw LengthError("encoding expects " + std::to_string(bits()) + " bits");
  double v = 0.0;
  for (int i = 0; i < bits(); ++i) {
    if (z[i]) v += weight(i);
  }
  return v;
}

double BinaryEncoding::max_value() const { return std::ldexp(1.0, P) - std::ldexp(1.0, -D); }

double BinaryEncoding::min_value() const { return -(std::ldexp(1.0, N) - 1.0); }

BinaryEncoding size_encoding(double upper, double lower, int frac_bits) {
  upper = snap(upper);
  lower = snap(lower);
  BinaryEncoding enc;
  if (upper <= 0.0 && lower >= 0.0) return enc;
  enc.P = integer_bits(upper);
  enc.D = std::max(0, frac_bits);
  if (lower < 0.0) enc.N = integer_bits(std::ceil(-lower));
  return enc;
}

int fractional_bits(double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw ConfigError("precision must lie in (0, 1]");
  int d = 0;
  while (std::ldexp(1.0, -d) > eps * (1.0 + 1e-12)) ++d;
  return d;
}

void PenaltyWeights::validate() const {
  if (!(pi_obj >= 0.0) || !(pi1 > 0.0) || !(pi2 > 0.0) || !(pi3 > 0.0) || !std::isfinite(pi_obj) ||
      !std::isfinite(pi1) || !std::isfinite(pi2) || !std::isfinite(pi3)) {
    throw ConfigError("penalty weights must be positive (pi_obj nonnegative)");
  }
}

BoundSet relaxation_bounds(const OriginalProblem& op) {
  BoundSet bounds;
  bounds.phi_max = phi_max_bound(op);
  try {
    bounds.phi_min = std::min(phi_min_bound(op), bounds.phi_max);
  } catch (const RelaxationUnbounded&) {
    // h'y has no floor over the relaxation; the driver widens this when a lower SP value shows up
    bounds.phi_min = std::min(0.0, bounds.phi_max);
  }
  for (int k = 0; k < op.m2(); ++k) bounds.master_slack_max.push_back(std::max(0.0, slack_max_bound(op, k)));
  return bounds;
}

double cut_slack_bound(const BendersCut& cut, double phi_min) {
  // max over the box of constant - coefficients'x (- phi for optimality cuts)
  double v = cut.constant;
  for (Eigen::Index j = 0; j < cut.coefficients.size(); ++j) v -= std::min(0.0, cut.coefficients[j]);
  if (cut.kind == CutKind::Optimality) v -= phi_min;
  return v;
}

void add_cut_bounds(BoundSet& bounds, const CutPool& cuts) {
  bounds.optimality_slack_max.clear();
  bounds.feasibility_slack_max.clear();
  for (const auto& cut : cuts.optimality()) {
    bounds.optimality_slack_max.push_back(std::max(0.0, cut_slack_bound(cut, bounds.phi_min)));
  }
  for (const auto& cut : cuts.feasibility()) {
    bounds.feasibility_slack_max.push_back(std::max(0.0, cut_slack_bound(cut, bounds.phi_min)));
  }
}

std::string_view to_string(VarRole role) {
  switch (role) {
    case VarRole::XBit:
      return "x";
    case VarRole::Phi:
      return "phi";
    case VarRole::MasterSlack:
      return "master_slack";
    case VarRole::OptimalitySlack:
      return "optimality_slack";
    case VarRole::FeasibilitySlack:
      return "feasibility_slack";
  }
  return "?";
}

const LayoutEntry* QuboModel::find(VarRole role, int index) const {
  for (const auto& e : layout) {
    if (e.role == role && e.index == index) return &e;
  }
  return nullptr;
}

double QuboModel::cost(const Bits& z) const {
  const int n_bits = t();
  if (static_cast<int>(z.size()) != n_bits) throw LengthError("bitstring length differs from t");
  double s = constant;
  for (int i = 0; i < n_bits; ++i) {
    if (!z[i]) continue;
    s += Q(i, i);
    for (int j = i + 1; j < n_bits; ++j) {
      if (z[j]) s += 2.0 * Q(i, j);
    }
  }
  return s;
}

QuboModel qubo_from_matrix(const Eigen::MatrixXd& Q, double constant) {
  if (Q.rows() != Q.cols()) throw DimensionError("QUBO matrix must be square");
  QuboModel model;
  model.Q = 0.5 * (Q + Q.transpose());
  model.constant = constant;
  model.objective = Eigen::VectorXd::Zero(Q.rows());
  return model;
}

QuboModel build_qubo(const OriginalProblem& op, const CutPool& cuts, const PenaltyWeights& weights,
                     const BoundSet& bounds, const QuboOptions& options) {
  weights.validate();
  const Plan plan = plan_layout(op, cuts, bounds, options);
  if (plan.t > options.max_qubits) {
    throw SizeError("QUBO needs " + std::to_string(plan.t) + " qubits, budget is " +
                    std::to_string(options.max_qubits));
  }
  const int t = plan.t;
  QuboModel model;
  model.layout = plan.layout;
  model.n = op.n();
  model.m2 = op.m2();
  model.pi_obj = weights.pi_obj;
  model.cuts = cuts.optimality();
  model.cuts.insert(model.cuts.end(), cuts.feasibility().begin(), cuts.feasibility().end());

  const LayoutEntry* phi = model.find(VarRole::Phi);
  model.objective = Eigen::VectorXd::Zero(t);
  for (int j = 0; j < op.n(); ++j) model.objective[j] = op.c[j];
  add_encoding(model.objective, phi->encoding);

  auto equality = [&](VarRole role, int index, const Eigen::VectorXd& x_coef, bool with_phi, double rhs,
                      double weight) {
    EncodedEquality eq;
    eq.role = role;
    eq.index = index;
    eq.coefficients = Eigen::VectorXd::Zero(t);
    eq.coefficients.head(op.n()) = x_coef;
    if (with_phi) add_encoding(eq.coefficients, phi->encoding);
    add_encoding(eq.coefficients, model.find(role, index)->encoding);
    eq.rhs = rhs;
    eq.weight = weight;
    model.equalities.push_back(std::move(eq));
  };
  for (int k = 0; k < op.m2(); ++k) {
    equality(VarRole::MasterSlack, k, op.B.row(k).transpose(), false, op.b_prime[k], weights.pi1);
  }
  for (std::size_t k = 0; k < cuts.optimality().size(); ++k) {
    const auto& cut = cuts.optimality()[k];
    equality(VarRole::OptimalitySlack, static_cast<int>(k), snapped(cut.coefficients), true, snap(cut.constant),
             weights.pi2);
  }
  for (std::size_t k = 0; k < cuts.feasibility().size(); ++k) {
    const auto& cut = cuts.feasibility()[k];
    equality(VarRole::FeasibilitySlack, static_cast<int>(k), snapped(cut.coefficients), false, snap(cut.constant),
             weights.pi3);
  }

  model.Q = Eigen::MatrixXd::Zero(t, t);
  model.Q.diagonal() = -weights.pi_obj * model.objective;
  for (const auto& eq : model.equalities) {
    const Eigen::VectorXd& a = eq.coefficients;
    const double w = eq.weight;
    for (int i = 0; i < t; ++i) {
      if (a[i] == 0.0) continue;
      model.Q(i, i) += w * (a[i] * a[i] - 2.0 * eq.rhs * a[i]);
      for (int j = 0; j < t; ++j) {
        if (j != i && a[j] != 0.0) model.Q(i, j) += w * a[i] * a[j];
      }
    }
    model.constant += w * eq.rhs * eq.rhs;
  }
  return model;
}

int qubit_count(const OriginalProblem& op, const CutPool& cuts, const BoundSet& bounds, const QuboOptions& options) {
  return plan_layout(op, cuts, bounds, options).t;
}

DecodedMaster decode(const QuboModel& model, const OriginalProblem& op, const Bits& z) {
  if (static_cast<int>(z.size()) != model.t()) {
    throw LengthError("bitstring has " + std::to_string(z.size()) + " bits, model has " + std::to_string(model.t()));
  }
  if (!model.has_layout()) throw LengthError("model carries no variable layout");
  DecodedMaster out;
  out.qubo_cost = model.cost(z);
  out.x.assign(z.begin(), z.begin() + model.n);
  const LayoutEntry* phi = model.find(VarRole::Phi);
  out.phi = phi->encoding.value(slice(z, phi->encoding));
  out.master_slacks = Eigen::VectorXd::Zero(model.m2);
  const int n_opt = static_cast<int>(std::count_if(model.cuts.begin(), model.cuts.end(),
                                                    [](const BendersCut& c) { return c.kind == CutKind::Optimality; }));
  out.cut_slacks = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.cuts.size()));
  for (const auto& e : model.layout) {
    const double v = e.encoding.value(slice(z, e.encoding));
    if (e.role == VarRole::MasterSlack) out.master_slacks[e.index] = v;
    if (e.role == VarRole::OptimalitySlack) out.cut_slacks[e.index] = v;
    if (e.role == VarRole::FeasibilitySlack) out.cut_slacks[n_opt + e.index] = v;
  }
  const Eigen::VectorXd xv = to_vector(out.x);
  out.penalty_residuals.resize(static_cast<Eigen::Index>(model.m2 + model.cuts.size()));
  for (int k = 0; k < model.m2; ++k) {
    out.penalty_residuals[k] = op.B.row(k).dot(xv) + out.master_slacks[k] - op.b_prime[k];
  }
  for (std::size_t k = 0; k < model.cuts.size(); ++k) {
    const auto& cut = model.cuts[k];
    double r = snapped(cut.coefficients).dot(xv) + out.cut_slacks[static_cast<Eigen::Index>(k)] - snap(cut.constant);
    if (cut.kind == CutKind::Optimality) r += out.phi;
    out.penalty_residuals[model.m2 + static_cast<Eigen::Index>(k)] = r;
  }
  out.objective = op.c.dot(xv) + out.phi;
  return out;
}

Bits encode(const QuboModel& model, const Bits& x, double phi, const Eigen::VectorXd& master_slacks,
            const Eigen::VectorXd& cut_slacks) {
  if (static_cast<int>(x.size()) != model.n) throw LengthError("x has the wrong length");
  Bits z(static_cast<std::size_t>(model.t()), 0);
  std::copy(x.begin(), x.end(), z.begin());
  int n_opt = 0;
  for (const auto& c : model.cuts) n_opt += c.kind == CutKind::Optimality ? 1 : 0;
  for (const auto& e : model.layout) {
    switch (e.role) {
      case VarRole::XBit:
        break;
      case VarRole::Phi:
        write_value(z, e.encoding, phi);
        break;
      case VarRole::MasterSlack:
        write_value(z, e.encoding, master_slacks[e.index]);
        break;
      case VarRole::OptimalitySlack:
        write_value(z, e.encoding, cut_slacks[e.index]);
        break;
      case VarRole::FeasibilitySlack:
        write_value(z, e.encoding, cut_slacks[n_opt + e.index]);
        break;
    }
  }
  return z;
}

double penalty_hamiltonian(const QuboModel& model, const Bits& z) {
  if (static_cast<int>(z.size()) != model.t()) throw LengthError("bitstring length differs from t");
  const Eigen::VectorXd zv = to_vector(z);
  double h = -model.pi_obj * model.objective.dot(zv);
  for (const auto& eq : model.equalities) {
    const double r = eq.coefficients.dot(zv) - eq.rhs;
    h += eq.weight * r * r;
  }
  return h;
}

nlohmann::json qubo_to_json(const QuboModel& model) {
  nlohmann::json j;
  j["t"] = model.t();
  j["constant"] = model.constant;
  auto entries = nlohmann::json::array();
  for (int i = 0; i < model.t(); ++i) {
    for (int k = i; k < model.t(); ++k) {
      const double q = i == k ? model.Q(i, i) : 2.0 * model.Q(i, k);
      if (q != 0.0) entries.push_back({i, k, q});
    }
  }
  j["entries"] = std::move(entries);
  return j;
}

QuboModel qubo_from_json(const nlohmann::json& j) {
  try {
    const int t = j.at("t").get<int>();
    if (t < 0) throw ParseError("t must be nonnegative");
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(t, t);
    for (const auto& e : j.at("entries")) {
      if (!e.is_array() || e.size() != 3) throw ParseError("entries must be [i, j, q] triples");
      const int a = e[0].get<int>(), b = e[1].get<int>();
      const double q = e[2].get<double>();
      if (a < 0 || b < a || b >= t) throw ParseError("entry indices must satisfy 0 <= i <= j < t");
      if (a == b) {
        Q(a, a) += q;
      } else {
        Q(a, b) += 0.5 * q;
        Q(b, a) += 0.5 * q;
      }
    }
    QuboModel model;
    model.Q = Q;
    model.constant = j.at("constant").get<double>();
    model.objective = Eigen::VectorXd::Zero(t);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed QUBO file: ") + e.what());
  }
}

void save_qubo(const QuboModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << qubo_to_json(model).dump(1) << '\n';
}

QuboModel load_qubo(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open QUBO file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed QUBO file " + path.string() + ": " + e.what());
  }
  return qubo_from_json(j);
}

}  // namespace benders_atoms
