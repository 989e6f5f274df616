#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "benders_atoms/pulse_optimizer.hpp"
#include "benders_atoms/qubo.hpp"
#include "benders_atoms/samplers.hpp"

namespace benders_atoms {

/// Device constants. Units: micrometers, microseconds, rad/us.
struct DeviceSpec {
  double C6 = 5.42e6;  // rad um^6 / us
  double min_distance = 4.0;
  double max_radius = 35.0;
  double omega_max = 12.57;
  double duration_min = 0.016;
  double duration_max = 4.0;
  double detuning_max = 20.0;  // |delta| bound for the sweep endpoints
  int max_atoms = 12;
};

struct Register {
  std::vector<Eigen::Vector2d> positions;
  double C6 = 5.42e6;
  double min_distance = 4.0;
  double max_radius = 35.0;

  int size() const { return static_cast<int>(positions.size()); }
  /// u_ij = C6 / r_ij^6, zero diagonal.
  Eigen::MatrixXd interactions() const;
  /// Throws CapacityError when atoms are too close or outside the radius.
  void validate() const;
};

nlohmann::json register_to_json(const Register& reg);
void save_register(const Register& reg, const std::filesystem::path& path);

struct Embedding {
  Register reg;
  double deviation = 0.0;  // sum_{i != j} |q_ij - u_ij|
  int first_atom = 0;
  double spacing = 0.0;                  // lattice step
  std::vector<Eigen::Vector2d> candidates;  // the full candidate set, in tie-break order
  std::vector<int> placement_order;
};

/// Pair coefficients q_ij = 2 Q_ij (i != j), the weight of z_i z_j in z'Qz.
Eigen::MatrixXd pair_coefficients(const QuboModel& model);

/// Triangular lattice centered at the origin, trimmed to the radius, sorted by distance to the
/// center and then by coordinates.
std::vector<Eigen::Vector2d> lattice_candidates(double spacing, double max_radius);

/// Greedy register embedding: a seeded-random first atom at the center, then every other atom
/// (ascending index) at the free candidate minimizing the deviation to the placed atoms.
/// Throws SizeError for t > max_atoms and CapacityError when candidates run out.
Embedding embed(const QuboModel& model, const DeviceSpec& device, std::uint64_t seed);

/// Sum over i != j of |q_ij - C6 / r_ij^6|.
double embedding_deviation(const Eigen::MatrixXd& pair_coef, const Register& reg);

/// Re-scans every greedy step and reports whether each chosen position attained the minimum.
bool verify_greedy(const Embedding& emb, const QuboModel& model);

struct PulseParams {
  double omega_max = 0.0;
  double delta_init = 0.0;
  double delta_final = 0.0;
  double duration = 1.0;

  /// Trapezoid: linear rise over T/4, plateau over T/2, linear fall over T/4.
  double omega(double t) const;
  /// Linear sweep from delta_init to delta_final.
  double delta(double t) const;

  ParamVector as_vector() const { return {omega_max, delta_init, delta_final, duration}; }
  static PulseParams from_vector(const ParamVector& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Parameter box: omega in [omega_lo, omega_max], delta_init in [-d, 0], delta_final in [0, d],
/// duration in [T_min, T_max].
ParamBox default_pulse_box(const DeviceSpec& device);

/// Arbitrary drive waveform for evolve().
struct Waveform {
  std::function<double(double)> omega;
  std::function<double(double)> delta;
  double duration = 0.0;

  static Waveform from_pulse(const PulseParams& pulse);
};

struct EvolutionResult {
  Eigen::VectorXcd state;  // amplitude of basis index k; bit u of k is atom u
  double norm_drift = 0.0;
};

/// H(t) = (Omega(t)/2) sum_u X_u - Delta(t) sum_u n_u + sum_{u<v} U_uv n_u n_v from |0...0>.
/// Second-order split-step with ceil(T/dt) uniform steps; the diagonal part is applied as exact
/// phases and the drive as exact single-atom rotations, fields evaluated at step midpoints.
/// Throws SizeError beyond `max_atoms`, ConfigError for dt > T/100 or dt <= 0,
/// NormDriftError when | |psi|^2 - 1 | > 1e-6.
EvolutionResult evolve(const Register& reg, const Waveform& wave, double dt, int max_atoms = 12);
EvolutionResult evolve(const Register& reg, const PulseParams& pulse, double dt, int max_atoms = 12);

/// N draws from |a_k|^2, costed with the model. Bit u of the basis index maps to bit u of z.
SampleSet measure(const EvolutionResult& result, const QuboModel& model, int shots, std::uint64_t seed);

struct ShapeResult {
  PulseParams params;
  SampleSet samples;
  std::vector<Evaluation> history;  // (params, <C>) per evaluation
};

struct EmulatorSettings {
  DeviceSpec device;
  int pulse_iterations = 20;
  double dt_fraction = 1e-3;  // dt = T * dt_fraction
  std::shared_ptr<const PulseOptimizer> optimizer;  // default LatinGoldenOptimizer
};

/// Pulse shaping: exactly p evaluations of (evolve, measure) with parameters from the optimizer,
/// the first at the box midpoint. Returns the evaluation with the lowest average sampled cost.
ShapeResult shape_pulse(const Register& reg, const QuboModel& model, const ParamBox& box, int p, int shots,
                        std::uint64_t seed, const EmulatorSettings& settings = {});

/// Pulse trace as CSV rows "time,omega,delta".
void save_pulse_csv(const PulseParams& pulse, const std::filesystem::path& path, int points = 201);

/// Neutral-atom backend: embed, shape the pulse, return the samples of the best pulse.
class EmulatorSampler : public Sampler {
 public:
  explicit EmulatorSampler(EmulatorSettings settings = {}) : settings_(std::move(settings)) {}
  std::string name() const override { return "emulator"; }
  int max_qubits() const override { return settings_.device.max_atoms; }
  SampleSet sample(const QuboModel& model, const SamplerConfig& cfg) const override;
  const EmulatorSettings& settings() const { return settings_; }

 private:
  EmulatorSettings settings_;
};

}  // namespace benders_atoms
