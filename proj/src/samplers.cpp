#include "benders_atoms/samplers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "benders_atoms/errors.hpp"

namespace benders_atoms {

namespace {

bool tie(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)); }

// Connected groups of the bits >= first, under the nonzero pattern of Q.
std::vector<std::vector<int>> components(const Eigen::MatrixXd& Q, int first) {
  const int t = static_cast<int>(Q.rows());
  std::vector<int> label(static_cast<std::size_t>(t), -1);
  std::vector<std::vector<int>> out;
  for (int s = first; s < t; ++s) {
    if (label[s] >= 0) continue;
    std::vector<int> group{s};
    label[s] = static_cast<int>(out.size());
    for (std::size_t k = 0; k < group.size(); ++k) {
      for (int j = first; j < t; ++j) {
        if (label[j] < 0 && Q(group[k], j) != 0.0) {
          label[j] = label[s];
          group.push_back(j);
        }
      }
    }
    std::sort(group.begin(), group.end());
    out.push_back(std::move(group));
  }
  return out;
}

// A slack group whose bits form one binary grid v = step * u, u in [0, 2^k - 1], appearing
// only through a single squared equality: its cost is alpha v^2 + (gamma + field) v and the
// minimum sits at one of the two grid points around the vertex.
struct LineGroup {
  std::vector<int> bits;
  std::vector<double> weights;
  std::vector<int> shift;  // bit of u carried by bits[b]
  double step = 1.0;
  double alpha = 0.0;
  double gamma = 0.0;
  std::uint64_t top = 0;

  double minimize(const std::vector<double>& field, Bits& z) const {
    const double beta = gamma + field[bits[0]] / weights[0];
    const double vertex = -beta / (2.0 * alpha * step);
    const double lo = std::clamp(std::floor(vertex), 0.0, static_cast<double>(top));
    const double hi = std::clamp(std::ceil(vertex), 0.0, static_cast<double>(top));
    auto cost = [&](double u) { return alpha * u * u * step * step + beta * u * step; };
    auto u0 = static_cast<std::uint64_t>(lo), u1 = static_cast<std::uint64_t>(hi);
    double c0 = cost(lo);
    const double c1 = cost(hi);
    if (u1 != u0 && ((c1 < c0 && !tie(c1, c0)) || (tie(c1, c0) && lex_before(u1, u0)))) {
      u0 = u1;
      c0 = c1;
    }
    for (std::size_t b = 0; b < bits.size(); ++b) z[bits[b]] = (u0 >> shift[b]) & 1U;
    return c0;
  }

  bool lex_before(std::uint64_t a, std::uint64_t b) const {
    for (std::size_t i = 0; i < bits.size(); ++i) {
      const bool ba = (a >> shift[i]) & 1U, bb = (b >> shift[i]) & 1U;
      if (ba != bb) return !ba;
    }
    return false;
  }
};

std::optional<LineGroup> line_group(const QuboModel& model, const std::vector<int>& grp, int s) {
  const int k = static_cast<int>(grp.size());
  if (k < 2) return std::nullopt;
  const LayoutEntry* owner = nullptr;
  for (const auto& e : model.layout) {
    if (grp[0] >= e.encoding.offset && grp[0] < e.encoding.offset + e.encoding.bits()) owner = &e;
  }
  if (!owner || owner->encoding.N != 0 || owner->encoding.bits() != k || owner->encoding.offset != grp[0]) {
    return std::nullopt;
  }
  LineGroup lg;
  lg.bits = grp;
  double wmin = std::numeric_limits<double>::infinity();
  for (int b = 0; b < k; ++b) {
    lg.weights.push_back(owner->encoding.weight(b));
    wmin = std::min(wmin, lg.weights.back());
  }
  lg.step = wmin;
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (int b = 0; b < k; ++b) {
    const int e = static_cast<int>(std::lround(std::log2(lg.weights[b] / wmin)));
    if (e < 0 || e >= k || used[e] || std::ldexp(wmin, e) != lg.weights[b]) return std::nullopt;
    used[e] = true;
    lg.shift.push_back(e);
  }
  lg.top = (1ULL << k) - 1;
  const Eigen::MatrixXd& Q = model.Q;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a) + std::abs(b)); };
  lg.alpha = Q(grp[0], grp[1]) / (lg.weights[0] * lg.weights[1]);
  if (!(lg.alpha > 0.0)) return std::nullopt;
  lg.gamma = (Q(grp[0], grp[0]) - lg.alpha * lg.weights[0] * lg.weights[0]) / lg.weights[0];
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const double expect = lg.alpha * lg.weights[a] * lg.weights[b] + (a == b ? lg.gamma * lg.weights[a] : 0.0);
      if (!close(Q(grp[a], grp[b]), expect)) return std::nullopt;
    }
  }
  for (int i = 0; i < s; ++i) {
    const double r = Q(i, grp[0]) / lg.weights[0];
    for (int a = 1; a < k; ++a) {
      if (!close(Q(i, grp[a]), r * lg.weights[a])) return std::nullopt;
    }
  }
  return lg;
}

std::pair<Bits, double> enumerate_all(const QuboModel& model) {
  const int t = model.t();
  if (t > 24) throw SizeError("exact enumeration of a raw QUBO is limited to 24 bits");
  const Eigen::MatrixXd& Q = model.Q;
  Bits z(static_cast<std::size_t>(t), 0);
  Eigen::VectorXd field = Eigen::VectorXd::Zero(t);  // sum_{j != i} Q_ij z_j
  double cost = model.constant;
  Bits best = z;
  double best_cost = cost;
  const std::uint64_t total = 1ULL << t;
  for (std::uint64_t g = 1; g < total; ++g) {
    const int i = std::countr_zero(g);  // Gray code flip
    const double sign = z[i] ? -1.0 : 1.0;
    cost += sign * (Q(i, i) + 2.0 * field[i]);
    z[i] ^= 1;
    for (int j = 0; j < t; ++j) {
      if (j != i) field[j] += sign * Q(j, i);
    }
    if (cost < best_cost && !tie(cost, best_cost)) {
      best_cost = cost;
      best = z;
    } else if (tie(cost, best_cost) && lex_less(z, best)) {
      best = z;
      best_cost = std::min(best_cost, cost);
    }
  }
  return {best, model.cost(best)};
}

}  // namespace

const Sample& SampleSet::best() const {
  if (entries.empty()) throw Error("empty sample set");
  return entries.front();
}

double SampleSet::average_cost() const {
  if (total_shots == 0) return 0.0;
  double s = 0.0;
  for (const auto& e : entries) s += e.multiplicity * e.cost;
  return s / total_shots;
}

SampleSet SampleSet::from_draws(const QuboModel& model, const std::vector<Bits>& draws) {
  std::map<Bits, int> counts;
  for (const auto& d : draws) ++counts[d];
  SampleSet set;
  set.total_shots = static_cast<int>(draws.size());
  for (const auto& [bits, count] : counts) set.entries.push_back({bits, count, model.cost(bits)});
  std::stable_sort(set.entries.begin(), set.entries.end(), [](const Sample& a, const Sample& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return lex_less(a.bits, b.bits);
  });
  return set;
}

nlohmann::json sample_set_to_json(const SampleSet& samples) {
  nlohmann::json j;
  j["total_shots"] = samples.total_shots;
  auto entries = nlohmann::json::array();
  for (const auto& e : samples.entries) {
    entries.push_back({{"bits", bits_to_string(e.bits)}, {"multiplicity", e.multiplicity}, {"cost", e.cost}});
  }
  j["entries"] = std::move(entries);
  return j;
}

void SamplerConfig::validate() const {
  if (shots < 1) throw ConfigError("shots must be at least 1");
  if (!(anneal.alpha > 0.0 && anneal.alpha <= 1.0)) throw ConfigError("annealing alpha must lie in (0, 1]");
  if (anneal.sweeps && *anneal.sweeps < 0) throw ConfigError("sweep count must be nonnegative");
  if (anneal.sweeps_per_bit < 0) throw ConfigError("sweeps per bit must be nonnegative");
}

std::pair<Bits, double> exact_minimize(const QuboModel& model, std::uint64_t max_states) {
  const int t = model.t();
  if (t == 0) return {Bits{}, model.constant};
  if (!model.has_layout()) return enumerate_all(model);

  // Conditioning set: the x and phi bits, which lead the layout.
  int s = 0;
  for (const auto& e : model.layout) {
    if (e.role == VarRole::XBit || e.role == VarRole::Phi) s = std::max(s, e.encoding.offset + e.encoding.bits());
  }
  const Eigen::MatrixXd& Q = model.Q;
  const auto groups = components(Q, s);
  std::vector<std::optional<LineGroup>> lines(groups.size());
  std::uint64_t per_config = 1;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    lines[g] = line_group(model, groups[g], s);
    if (lines[g]) {
      per_config += groups[g].size();
    } else {
      if (groups[g].size() > 30) throw SizeError("slack group too large for exact enumeration");
      per_config += 1ULL << groups[g].size();
    }
  }
  if (s > 40 || (per_config << s) > max_states) {
    throw SizeError("exact enumeration needs more than " + std::to_string(max_states) + " states");
  }

  // Internal cost of each group state; local bit k of a group is mask bit (size-1-k) so that
  // ascending masks run in lexicographic order.
  std::vector<std::vector<double>> internal(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (lines[g]) continue;
    const auto& grp = groups[g];
    const int k = static_cast<int>(grp.size());
    auto& tab = internal[g];
    tab.assign(1ULL << k, 0.0);
    for (std::uint64_t m = 1; m < tab.size(); ++m) {
      const int low = std::countr_zero(m);
      const int a = grp[k - 1 - low];
      const std::uint64_t rest = m & (m - 1);
      double v = tab[rest] + Q(a, a);
      for (std::uint64_t r = rest; r; r &= r - 1) v += 2.0 * Q(a, grp[k - 1 - std::countr_zero(r)]);
      tab[m] = v;
    }
  }

  Bits z(static_cast<std::size_t>(t), 0);
  Bits best;
  double best_cost = 0.0;
  std::vector<double> field(static_cast<std::size_t>(t), 0.0);
  std::vector<double> lin;
  for (std::uint64_t m = 0; m < (1ULL << s); ++m) {
    for (int i = 0; i < s; ++i) z[i] = (m >> (s - 1 - i)) & 1U;
    double cost = model.constant;
    for (int i = 0; i < s; ++i) {
      if (!z[i]) continue;
      cost += Q(i, i);
      for (int j = i + 1; j < s; ++j) {
        if (z[j]) cost += 2.0 * Q(i, j);
      }
    }
    for (int j = s; j < t; ++j) {
      double f = 0.0;
      for (int i = 0; i < s; ++i) {
        if (z[i]) f += Q(i, j);
      }
      field[j] = 2.0 * f;
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& grp = groups[g];
      const int k = static_cast<int>(grp.size());
      if (lines[g]) {
        cost += lines[g]->minimize(field, z);
        continue;
      }
      const auto& tab = internal[g];
      lin.assign(tab.size(), 0.0);
      std::uint64_t arg = 0;
      double low = tab[0];
      for (std::uint64_t gm = 1; gm < tab.size(); ++gm) {
        lin[gm] = lin[gm & (gm - 1)] + field[grp[k - 1 - std::countr_zero(gm)]];
        const double v = tab[gm] + lin[gm];
        if (v < low && !tie(v, low)) {
          low = v;
          arg = gm;
        }
      }
      for (int b = 0; b < k; ++b) z[grp[b]] = (arg >> (k - 1 - b)) & 1U;
      cost += low;
    }
    if (best.empty() || (cost < best_cost && !tie(cost, best_cost))) {
      best = z;
      best_cost = cost;
    }
  }
  return {best, model.cost(best)};
}

SampleSet anneal(const QuboModel& model, const SamplerConfig& cfg) {
  cfg.validate();
  const int t = model.t();
  if (t < 1) throw SizeError("annealing needs at least one bit");
  const Eigen::MatrixXd& Q = model.Q;
  const double t0 = std::max(Q.cwiseAbs().maxCoeff(), 1e-12) * t;
  const int sweeps = cfg.anneal.total_sweeps(t);
  std::vector<Bits> draws;
  draws.reserve(static_cast<std::size_t>(cfg.shots));
  std::vector<double> field(static_cast<std::size_t>(t));
  for (int shot = 0; shot < cfg.shots; ++shot) {
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(shot)));
    Bits z(static_cast<std::size_t>(t));
    for (auto& b : z) b = static_cast<std::uint8_t>(rng() >> 63);
    for (int i = 0; i < t; ++i) {
      double f = 0.0;
      for (int j = 0; j < t; ++j) {
        if (j != i && z[j]) f += Q(i, j);
      }
      field[i] = f;
    }
    double temperature = t0;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      for (int i = 0; i < t; ++i) {
        const double sign = z[i] ? -1.0 : 1.0;
        const double delta = sign * (Q(i, i) + 2.0 * field[i]);
        if (delta > 0.0 && uniform01(rng) >= std::exp(-delta / temperature)) continue;
        z[i] ^= 1;
        for (int j = 0; j < t; ++j) {
          if (j != i) field[j] += sign * Q(j, i);
        }
      }
      temperature *= cfg.anneal.alpha;
    }
    draws.push_back(std::move(z));
  }
  return SampleSet::from_draws(model, draws);
}

SampleSet ExactSampler::sample(const QuboModel& model, const SamplerConfig& cfg) const {
  cfg.validate();
  if (model.t() > max_qubits()) throw SizeError("model exceeds the exact sampler limit");
  auto [bits, cost] = exact_minimize(model);
  SampleSet set;
  set.total_shots = cfg.shots;
  set.entries.push_back({bits, cfg.shots, cost});
  return set;
}

SampleSet AnnealSampler::sample(const QuboModel& model, const SamplerConfig& cfg) const {
  if (model.t() > max_qubits()) throw SizeError("model exceeds the annealing sampler limit");
  return anneal(model, cfg);
}

}  // namespace benders_atoms
