#include "benders_atoms/rydberg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <tuple>

#include <nlohmann/json.hpp>

#include "benders_atoms/errors.hpp"

namespace benders_atoms {

namespace {

using cd = std::complex<double>;

double interaction(double C6, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const double r2 = (a - b).squaredNorm();
  return C6 / (r2 * r2 * r2);
}

double step_deviation(const Eigen::MatrixXd& q, double C6, int atom, const Eigen::Vector2d& pos,
                      const std::vector<int>& placed, const std::vector<Eigen::Vector2d>& positions) {
  double dev = 0.0;
  for (int v : placed) dev += std::abs(q(atom, v) - interaction(C6, pos, positions[v]));
  return dev;
}

}  // namespace

Eigen::MatrixXd Register::interactions() const {
  const int m = size();
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) U(i, j) = U(j, i) = interaction(C6, positions[i], positions[j]);
  }
  return U;
}

void Register::validate() const {
  for (int i = 0; i < size(); ++i) {
    if (positions[i].norm() > max_radius + 1e-9) throw CapacityError("atom outside the allowed radius");
    for (int j = i + 1; j < size(); ++j) {
      if ((positions[i] - positions[j]).norm() < min_distance - 1e-9) throw CapacityError("atoms closer than the minimum distance");
    }
  }
}

nlohmann::json register_to_json(const Register& reg) {
  nlohmann::json j;
  auto pos = nlohmann::json::array();
  for (const auto& p : reg.positions) pos.push_back({p.x(), p.y()});
  j["positions"] = std::move(pos);
  j["C6"] = reg.C6;
  return j;
}

void save_register(const Register& reg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << register_to_json(reg).dump(1) << '\n';
}

Eigen::MatrixXd pair_coefficients(const QuboModel& model) {
  Eigen::MatrixXd q = 2.0 * model.Q;
  q.diagonal().setZero();
  return q;
}

std::vector<Eigen::Vector2d> lattice_candidates(double spacing, double max_radius) {
  if (!(spacing > 0.0)) throw ConfigError("lattice spacing must be positive");
  const int reach = static_cast<int>(std::ceil(max_radius / spacing)) + 2;
  const double h = std::sqrt(3.0) / 2.0;
  std::vector<Eigen::Vector2d> pts;
  for (int b = -reach; b <= reach; ++b) {
    for (int a = -reach - std::abs(b); a <= reach + std::abs(b); ++a) {
      Eigen::Vector2d p(spacing * (a + 0.5 * b), spacing * h * b);
      if (std::abs(p.x()) < 1e-12) p.x() = 0.0;
      if (std::abs(p.y()) < 1e-12) p.y() = 0.0;
      if (p.norm() <= max_radius + 1e-9) pts.push_back(p);
    }
  }
  auto key = [](const Eigen::Vector2d& p) {
    return std::make_tuple(std::llround(p.norm() * 1e6), std::llround(p.x() * 1e6), std::llround(p.y() * 1e6));
  };
  std::sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return pts;
}

double embedding_deviation(const Eigen::MatrixXd& pair_coef, const Register& reg) {
  const Eigen::MatrixXd U = reg.interactions();
  double dev = 0.0;
  for (int i = 0; i < reg.size(); ++i) {
    for (int j = 0; j < reg.size(); ++j) {
      if (i != j) dev += std::abs(pair_coef(i, j) - U(i, j));
    }
  }
  return dev;
}

Embedding embed(const QuboModel& model, const DeviceSpec& device, std::uint64_t seed) {
  const int t = model.t();
  if (t > device.max_atoms) {
    throw SizeError("QUBO with " + std::to_string(t) + " variables exceeds the " + std::to_string(device.max_atoms) +
                    "-atom limit");
  }
  Embedding emb;
  emb.reg.C6 = device.C6;
  emb.reg.min_distance = device.min_distance;
  emb.reg.max_radius = device.max_radius;
  if (t == 0) return emb;

  const Eigen::MatrixXd q = pair_coefficients(model);
  std::vector<double> mags;
  for (int i = 0; i < t; ++i) {
    for (int j = i + 1; j < t; ++j) {
      if (q(i, j) != 0.0) mags.push_back(std::abs(q(i, j)));
    }
  }
  double spacing = device.max_radius / 2.0;
  if (!mags.empty()) {
    auto mid = mags.begin() + static_cast<std::ptrdiff_t>((mags.size() - 1) / 2);
    std::nth_element(mags.begin(), mid, mags.end());
    spacing = std::pow(device.C6 / *mid, 1.0 / 6.0);
  }
  spacing = std::clamp(spacing, device.min_distance, std::max(device.min_distance, device.max_radius / 2.0));
  emb.spacing = spacing;
  emb.candidates = lattice_candidates(spacing, device.max_radius);
  if (static_cast<int>(emb.candidates.size()) < t) {
    throw CapacityError("only " + std::to_string(emb.candidates.size()) + " candidate positions for " +
                        std::to_string(t) + " atoms");
  }

  std::mt19937_64 rng(mix_seed(seed, 0xe3));
  emb.first_atom = static_cast<int>(rng() % static_cast<std::uint64_t>(t));
  std::vector<bool> used(emb.candidates.size(), false);
  emb.reg.positions.assign(static_cast<std::size_t>(t), Eigen::Vector2d::Zero());
  emb.reg.positions[emb.first_atom] = emb.candidates[0];
  used[0] = true;
  emb.placement_order.push_back(emb.first_atom);
  for (int u = 0; u < t; ++u) {
    if (u == emb.first_atom) continue;
    std::size_t pick = 0;
    double best = 0.0;
    bool found = false;
    for (std::size_t c = 0; c < emb.candidates.size(); ++c) {
      if (used[c]) continue;
      const double dev = step_deviation(q, device.C6, u, emb.candidates[c], emb.placement_order, emb.reg.positions);
      if (!found || dev < best - 1e-12 * (1.0 + best)) {
        found = true;
        best = dev;
        pick = c;
      }
    }
    used[pick] = true;
    emb.reg.positions[u] = emb.candidates[pick];
    emb.placement_order.push_back(u);
  }
  emb.reg.validate();
  emb.deviation = embedding_deviation(q, emb.reg);
  return emb;
}

bool verify_greedy(const Embedding& emb, const QuboModel& model) {
  const Eigen::MatrixXd q = pair_coefficients(model);
  std::vector<int> placed;
  std::vector<Eigen::Vector2d> taken;
  for (int u : emb.placement_order) {
    const auto& pos = emb.reg.positions[u];
    if (placed.empty()) {
      if (pos.norm() > 1e-12) return false;
    } else {
      const double chosen = step_deviation(q, emb.reg.C6, u, pos, placed, emb.reg.positions);
      for (const auto& c : emb.candidates) {
        bool occupied = false;
        for (const auto& p : taken) occupied = occupied || (p - c).norm() < 1e-9;
        if (occupied) continue;
        const double dev = step_deviation(q, emb.reg.C6, u, c, placed, emb.reg.positions);
        if (dev < chosen - 1e-9 * (1.0 + chosen)) return false;
      }
    }
    placed.push_back(u);
    taken.push_back(pos);
  }
  return true;
}

double PulseParams::omega(double t) const {
  const double T = duration;
  if (t <= 0.0 || t >= T) return 0.0;
  if (t < 0.25 * T) return omega_max * t / (0.25 * T);
  if (t > 0.75 * T) return omega_max * (T - t) / (0.25 * T);
  return omega_max;
}

double PulseParams::delta(double t) const {
  const double s = std::clamp(t / duration, 0.0, 1.0);
  return delta_init + (delta_final - delta_init) * s;
}

ParamBox default_pulse_box(const DeviceSpec& device) {
  ParamBox box;
  box.lower = {0.1 * device.omega_max, -device.detuning_max, 0.0, device.duration_min};
  box.upper = {device.omega_max, 0.0, device.detuning_max, device.duration_max};
  return box;
}

Waveform Waveform::from_pulse(const PulseParams& pulse) {
  Waveform w;
  w.omega = [pulse](double t) { return pulse.omega(t); };
  w.delta = [pulse](double t) { return pulse.delta(t); };
  w.duration = pulse.duration;
  return w;
}

EvolutionResult evolve(const Register& reg, const Waveform& wave, double dt, int max_atoms) {
  const int m = reg.size();
  if (m > max_atoms) throw SizeError("register exceeds the " + std::to_string(max_atoms) + "-atom emulator limit");
  const double T = wave.duration;
  if (!(T > 0.0)) throw ConfigError("pulse duration must be positive");
  if (!(dt > 0.0) || dt > T / 100.0 * (1.0 + 1e-12)) throw ConfigError("time step must lie in (0, T/100]");
  const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
  const double h = T / steps;

  const std::size_t dim = std::size_t{1} << m;
  const Eigen::MatrixXd U = reg.interactions();
  std::vector<int> excited(dim);
  std::vector<cd> int_full(dim), int_half(dim);
  for (std::size_t z = 0; z < dim; ++z) {
    double e = 0.0;
    for (int u = 0; u < m; ++u) {
      if (!((z >> u) & 1U)) continue;
      for (int v = u + 1; v < m; ++v) {
        if ((z >> v) & 1U) e += U(u, v);
      }
    }
    excited[z] = std::popcount(z);
    int_full[z] = std::polar(1.0, -h * e);
    int_half[z] = std::polar(1.0, -0.5 * h * e);
  }

  std::vector<cd> psi(dim, cd(0.0, 0.0));
  psi[0] = 1.0;
  std::vector<cd> det(static_cast<std::size_t>(m) + 1);

  auto apply_diag = [&](const std::vector<cd>& inter, double detuning_phase) {
    // exp(-i tau (-Delta n)) with detuning_phase = tau * Delta
    for (int k = 0; k <= m; ++k) det[k] = std::polar(1.0, detuning_phase * k);
    for (std::size_t z = 0; z < dim; ++z) psi[z] *= inter[z] * det[excited[z]];
  };
  auto apply_drive = [&](double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    if (s == 0.0) return;
    const cd ms(0.0, -s);
    for (int u = 0; u < m; ++u) {
      const std::size_t stride = std::size_t{1} << u;
      for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t z = base; z < base + stride; ++z) {
          const cd a = psi[z], b = psi[z + stride];
          psi[z] = c * a + ms * b;
          psi[z + stride] = ms * a + c * b;
        }
      }
    }
  };

  double prev_delta = wave.delta(0.5 * h);
  apply_diag(int_half, 0.5 * h * prev_delta);
  for (int k = 0; k < steps; ++k) {
    const double tm = (k + 0.5) * h;
    apply_drive(0.5 * h * wave.omega(tm));
    if (k + 1 < steps) {
      const double next_delta = wave.delta(tm + h);
      apply_diag(int_full, 0.5 * h * (prev_delta + next_delta));
      prev_delta = next_delta;
    } else {
      apply_diag(int_half, 0.5 * h * prev_delta);
    }
  }

  EvolutionResult out;
  out.state = Eigen::Map<Eigen::VectorXcd>(psi.data(), static_cast<Eigen::Index>(dim));
  out.norm_drift = std::abs(out.state.squaredNorm() - 1.0);
  if (out.norm_drift > 1e-6) throw NormDriftError("norm drift " + std::to_string(out.norm_drift) + " exceeds 1e-6");
  return out;
}

EvolutionResult evolve(const Register& reg, const PulseParams& pulse, double dt, int max_atoms) {
  return evolve(reg, Waveform::from_pulse(pulse), dt, max_atoms);
}

SampleSet measure(const EvolutionResult& result, const QuboModel& model, int shots, std::uint64_t seed) {
  if (shots < 1) throw ConfigError("shots must be at least 1");
  const auto dim = static_cast<std::size_t>(result.state.size());
  const int m = std::countr_zero(dim);
  if (model.t() != m) throw LengthError("model size differs from the register size");
  std::vector<double> cumulative(dim);
  double acc = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    acc += std::norm(result.state[static_cast<Eigen::Index>(k)]);
    cumulative[k] = acc;
  }
  std::mt19937_64 rng(seed);
  std::vector<Bits> draws;
  draws.reserve(static_cast<std::size_t>(shots));
  for (int s = 0; s < shots; ++s) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto k = std::min(dim - 1, static_cast<std::size_t>(it - cumulative.begin()));
    Bits z(static_cast<std::size_t>(m));
    for (int u_bit = 0; u_bit < m; ++u_bit) z[u_bit] = (k >> u_bit) & 1U;
    draws.push_back(std::move(z));
  }
  return SampleSet::from_draws(model, draws);
}

ShapeResult shape_pulse(const Register& reg, const QuboModel& model, const ParamBox& box, int p, int shots,
                        std::uint64_t seed, const EmulatorSettings& settings) {
  if (p < 1) throw ConfigError("pulse iteration budget must be at least 1");
  static const LatinGoldenOptimizer fallback;
  const PulseOptimizer& opt = settings.optimizer ? *settings.optimizer : fallback;
  ShapeResult best;
  double best_value = 0.0;
  for (int i = 0; i < p; ++i) {
    const ParamVector v = box.clamp(opt.propose(best.history, box, p, seed));
    const PulseParams pulse = PulseParams::from_vector(v);
    const auto evo = evolve(reg, pulse, pulse.duration * settings.dt_fraction, settings.device.max_atoms);
    SampleSet samples = measure(evo, model, shots, mix_seed(seed, static_cast<std::uint64_t>(i)));
    const double avg = samples.average_cost();
    best.history.push_back({v, avg});
    if (i == 0 || avg < best_value) {
      best_value = avg;
      best.params = pulse;
      best.samples = std::move(samples);
    }
  }
  return best;
}

void save_pulse_csv(const PulseParams& pulse, const std::filesystem::path& path, int points) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "time,omega,delta\n";
  for (int i = 0; i < points; ++i) {
    const double t = pulse.duration * i / std::max(1, points - 1);
    out << format_sig(t) << ',' << format_sig(pulse.omega(t)) << ',' << format_sig(pulse.delta(t)) << '\n';
  }
}

SampleSet EmulatorSampler::sample(const QuboModel& model, const SamplerConfig& cfg) const {
  cfg.validate();
  if (model.t() > max_qubits()) throw SizeError("model exceeds the emulator atom limit");
  const Embedding emb = embed(model, settings_.device, cfg.seed);
  const auto shaped = shape_pulse(emb.reg, model, default_pulse_box(settings_.device), settings_.pulse_iterations,
                                  cfg.shots, mix_seed(cfg.seed, 1), settings_);
  return shaped.samples;
}

}  // namespace benders_atoms
