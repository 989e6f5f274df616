#include "benders_atoms/types.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "benders_atoms/errors.hpp"

namespace benders_atoms {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Feasible:
      return "Feasible";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::Unbounded:
      return "Unbounded";
  }
  return "Unknown";
}

SolveStatus solve_status_from_string(std::string_view name) {
  if (name == "Optimal") return SolveStatus::Optimal;
  if (name == "Feasible") return SolveStatus::Feasible;
  if (name == "Infeasible") return SolveStatus::Infeasible;
  if (name == "Unbounded") return SolveStatus::Unbounded;
  throw ParseError("unknown status '" + std::string(name) + "'");
}

Eigen::VectorXd to_vector(const Bits& bits) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) v[static_cast<Eigen::Index>(i)] = bits[i];
  return v;
}

bool lex_less(const Bits& a, const Bits& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return a.size() < b.size();
}

std::string bits_to_string(const Bits& bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

Bits bits_from_string(std::string_view text) {
  Bits bits;
  bits.reserve(text.size());
  for (char ch : text) {
    if (ch != '0' && ch != '1') throw ParseError("bitstring may only contain 0 and 1");
    bits.push_back(ch == '1' ? 1 : 0);
  }
  return bits;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0.0";
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string format_sig(double v, int digits) {
  if (std::isnan(v)) return "";
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace benders_atoms
