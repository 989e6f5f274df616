#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "benders_atoms/qubo.hpp"
#include "benders_atoms/types.hpp"

namespace benders_atoms {

struct Sample {
  Bits bits;
  int multiplicity = 0;
  double cost = 0.0;
};

/// Distinct bitstrings with multiplicities, sorted by ascending cost, ties lexicographic.
struct SampleSet {
  std::vector<Sample> entries;
  int total_shots = 0;

  const Sample& best() const;
  /// (1/N) sum_i w_i C(b_i)
  double average_cost() const;

  static SampleSet from_draws(const QuboModel& model, const std::vector<Bits>& draws);
};

nlohmann::json sample_set_to_json(const SampleSet& samples);

struct AnnealSchedule {
  double alpha = 0.95;
  int sweeps_per_bit = 200;
  std::optional<int> sweeps;  // overrides sweeps_per_bit * t
  int total_sweeps(int t) const { return sweeps ? *sweeps : sweeps_per_bit * t; }
};

struct SamplerConfig {
  int shots = 500;
  std::uint64_t seed = 1;
  AnnealSchedule anneal;

  /// Throws ConfigError when shots < 1.
  void validate() const;
};

/// Exhaustive minimum of z'Qz + constant, ties broken lexicographically.
/// Models with a variable layout are enumerated over the x and phi bits, with the slack groups
/// minimized independently; raw matrices are enumerated directly and limited to 24 bits.
/// Throws SizeError when the enumeration would exceed `max_states`.
std::pair<Bits, double> exact_minimize(const QuboModel& model, std::uint64_t max_states = 1ULL << 28);

/// Independent single-flip Metropolis chains, one per shot, each seeded from (seed, shot).
SampleSet anneal(const QuboModel& model, const SamplerConfig& cfg);

class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::string name() const = 0;
  /// Largest supported t; sample() throws SizeError beyond it.
  virtual int max_qubits() const = 0;
  virtual SampleSet sample(const QuboModel& model, const SamplerConfig& cfg) const = 0;
};

class ExactSampler : public Sampler {
 public:
  std::string name() const override { return "exact"; }
  int max_qubits() const override { return 64; }
  SampleSet sample(const QuboModel& model, const SamplerConfig& cfg) const override;
};

class AnnealSampler : public Sampler {
 public:
  std::string name() const override { return "anneal"; }
  int max_qubits() const override { return 4096; }
  SampleSet sample(const QuboModel& model, const SamplerConfig& cfg) const override;
};

}  // namespace benders_atoms
