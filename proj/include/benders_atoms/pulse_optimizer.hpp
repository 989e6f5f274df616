#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace benders_atoms {

inline constexpr int kPulseDims = 4;
using ParamVector = std::array<double, kPulseDims>;

struct ParamBox {
  ParamVector lower{};
  ParamVector upper{};
  ParamVector midpoint() const;
  ParamVector clamp(const ParamVector& v) const;
};

struct Evaluation {
  ParamVector params{};
  double value = 0.0;
};

/// Black-box minimizer over a box. propose() sees the full history of evaluations, in
/// evaluation order, and must be a deterministic function of (history, box, budget, seed).
class PulseOptimizer {
 public:
  virtual ~PulseOptimizer() = default;
  virtual ParamVector propose(const std::vector<Evaluation>& history, const ParamBox& box, int budget,
                              std::uint64_t seed) const = 0;
};

/// First evaluation at the box midpoint, Latin-hypercube exploration up to ceil(budget/2)
/// evaluations, then coordinate-wise golden-section steps around the incumbent.
class LatinGoldenOptimizer : public PulseOptimizer {
 public:
  ParamVector propose(const std::vector<Evaluation>& history, const ParamBox& box, int budget,
                      std::uint64_t seed) const override;
};

/// Uniform draws over the box (baseline).
class RandomSearchOptimizer : public PulseOptimizer {
 public:
  ParamVector propose(const std::vector<Evaluation>& history, const ParamBox& box, int budget,
                      std::uint64_t seed) const override;
};

/// Latin-hypercube design of `count` points, deterministic per seed.
std::vector<ParamVector> latin_hypercube(const ParamBox& box, int count, std::uint64_t seed);

}  // namespace benders_atoms
