#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace deeprandom {

/// A party's secret parameter vector: a point in [0,1]^n.
using ParamVector = std::vector<double>;

/// A Bernoulli experiment vector: n values in {0,1}.
using Bits = std::vector<std::uint8_t>;

inline constexpr double kExactTol = 1e-12;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void check_param_vector(const ParamVector& v) {
  require(!v.empty(), "parameter vector must have n >= 1");
  for (double c : v)
    require(c >= -kExactTol && c <= 1.0 + kExactTol,
            "parameter vector coordinate outside [0,1]");
}

inline void check_bits(const Bits& b) {
  for (auto v : b) require(v == 0 || v == 1, "bit vector entry not in {0,1}");
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) s += a[l] * b[l];
  return s;
}

/// The evaluation phi(x, y) = (x . y) / n, the joint secret both parties
/// estimate. Values lie in [0,1] for inputs in [0,1]^n.
inline double evaluate_phi(const ParamVector& x, const ParamVector& y) {
  require(x.size() == y.size(), "evaluate_phi: length mismatch");
  require(!x.empty(), "evaluate_phi: empty vectors");
  return dot(x, y) / static_cast<double>(x.size());
}

inline double l1_norm(const ParamVector& v) {
  double s = 0.0;
  for (double c : v) s += c;
  return s;
}

inline int popcount(const Bits& b) {
  int s = 0;
  for (auto v : b) s += v;
  return s;
}

}  // namespace deeprandom
