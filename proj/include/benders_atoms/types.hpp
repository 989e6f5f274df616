#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace benders_atoms {

/// A 0/1 assignment; used for master variables x and for QUBO bitstrings.
using Bits = std::vector<std::uint8_t>;

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded };

std::string_view to_string(SolveStatus status);
SolveStatus solve_status_from_string(std::string_view name);

Eigen::VectorXd to_vector(const Bits& bits);

/// Lexicographic comparison with position 0 most significant.
bool lex_less(const Bits& a, const Bits& b);

std::string bits_to_string(const Bits& bits);
Bits bits_from_string(std::string_view text);

/// SplitMix64 finalizer. Derives independent RNG streams from (seed, index) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Shortest round-trip decimal for v, always with a decimal point ("2.0", "17.5").
std::string format_number(double v);

/// Fixed significant-digit rendering used in CSV output.
std::string format_sig(double v, int digits = 9);

}  // namespace benders_atoms
