#include "benders_atoms/pulse_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "benders_atoms/errors.hpp"
#include "benders_atoms/types.hpp"

namespace benders_atoms {

namespace {

constexpr double kGolden = 0.6180339887498949;

std::size_t incumbent(const std::vector<Evaluation>& history) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].value < history[best].value) best = i;
  }
  return best;
}

}  // namespace

ParamVector ParamBox::midpoint() const {
  ParamVector m{};
  for (int d = 0; d < kPulseDims; ++d) m[d] = 0.5 * (lower[d] + upper[d]);
  return m;
}

ParamVector ParamBox::clamp(const ParamVector& v) const {
  ParamVector out{};
  for (int d = 0; d < kPulseDims; ++d) out[d] = std::clamp(v[d], lower[d], upper[d]);
  return out;
}

std::vector<ParamVector> latin_hypercube(const ParamBox& box, int count, std::uint64_t seed) {
  std::vector<ParamVector> pts(static_cast<std::size_t>(std::max(0, count)));
  if (count <= 0) return pts;
  std::mt19937_64 rng(mix_seed(seed, 0x1a7e));
  for (int d = 0; d < kPulseDims; ++d) {
    std::vector<int> strata(static_cast<std::size_t>(count));
    std::iota(strata.begin(), strata.end(), 0);
    for (int i = count - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(strata[i], strata[j]);
    }
    for (int i = 0; i < count; ++i) {
      const double u = (strata[i] + uniform01(rng)) / count;
      pts[i][d] = box.lower[d] + u * (box.upper[d] - box.lower[d]);
    }
  }
  return pts;
}

ParamVector LatinGoldenOptimizer::propose(const std::vector<Evaluation>& history, const ParamBox& box,
                                          int budget, std::uint64_t seed) const {
  const int k = static_cast<int>(history.size());
  if (k == 0) return box.midpoint();
  const int explore = (budget + 1) / 2;
  if (k < explore) return latin_hypercube(box, explore - 1, seed)[k - 1];

  // Refinement: step j visits coordinate (j / 2) % dims and probes the incumbent moved by the
  // golden fraction of the half-width, first downward then upward; the half-width starts at a
  // quarter of the range and shrinks by the golden ratio after every full sweep of coordinates.
  const int j = k - explore;
  const int visit = j / 2;
  const int dim = visit % kPulseDims;
  const int sweep = visit / kPulseDims;
  const ParamVector center = history[incumbent(history)].params;
  const double width = 0.25 * (box.upper[dim] - box.lower[dim]) * std::pow(kGolden, sweep);
  ParamVector p = center;
  p[dim] += (j % 2 == 0 ? -1.0 : 1.0) * kGolden * width;
  return box.clamp(p);
}

ParamVector RandomSearchOptimizer::propose(const std::vector<Evaluation>& history, const ParamBox& box, int,
                                           std::uint64_t seed) const {
  std::mt19937_64 rng(mix_seed(seed, history.size()));
  ParamVector p{};
  for (int d = 0; d < kPulseDims; ++d) p[d] = box.lower[d] + uniform01(rng) * (box.upper[d] - box.lower[d]);
  return p;
}

}  // namespace benders_atoms
