#pragma once

#include <cstdint>
#include <vector>

#include "deeprandom/core.hpp"
#include "deeprandom/rng.hpp"

namespace deeprandom {

/// Degradation factor k >= 1 of the transform x -> x/k. k == 1 disables
/// degradation.
struct DegradationFactor {
  double k = 1.0;
};

inline void check_degradation_factor(double k) {
  require(k >= 1.0, "degradation factor k must be >= 1");
}

/// The Degradation transform: every coordinate divided by k.
inline ParamVector degrade_params(const ParamVector& x, double k) {
  check_degradation_factor(k);
  ParamVector out(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) out[l] = x[l] / k;
  return out;
}

/// Independent Bernoulli draw per coordinate: bit_l = 1 with probability p_l.
inline Bits bernoulli_draw(const ParamVector& p, Rng& rng) {
  Bits out(p.size());
  for (std::size_t l = 0; l < p.size(); ++l) {
    require(p[l] >= 0.0 && p[l] <= 1.0, "bernoulli_draw: probability outside [0,1]");
    out[l] = rng.bernoulli(p[l]) ? 1 : 0;
  }
  return out;
}

/// Product Bernoulli likelihood of observing `i` from parameters x/k.
inline double likelihood(const Bits& i, const ParamVector& x, double k) {
  require(i.size() == x.size(), "likelihood: length mismatch");
  double out = 1.0;
  for (std::size_t l = 0; l < i.size(); ++l) {
    const double p = x[l] / k;
    out *= i[l] ? p : (1.0 - p);
  }
  return out;
}

/// The unbiased estimator omega_T(i, j) = k^2 (i . j) / n. Values may exceed 1
/// (up to k^2); they are never clamped, clamping would break unbiasedness.
inline double omega_t(const Bits& i, const Bits& j, double k) {
  require(i.size() == j.size(), "omega_t: length mismatch");
  require(!i.empty(), "omega_t: empty vectors");
  int d = 0;
  for (std::size_t l = 0; l < i.size(); ++l) d += i[l] & j[l];
  return k * k * static_cast<double>(d) / static_cast<double>(i.size());
}

/// Outcome enumeration order is lexicographic over bit vectors, little-endian:
/// bit 0 of the code is coordinate 0. Fixed so strategy tables are portable.
inline Bits bits_from_code(std::uint32_t code, std::size_t n) {
  Bits out(n);
  for (std::size_t l = 0; l < n; ++l) out[l] = (code >> l) & 1u;
  return out;
}

inline std::uint32_t code_from_bits(const Bits& b) {
  std::uint32_t code = 0;
  for (std::size_t l = 0; l < b.size(); ++l)
    if (b[l]) code |= (1u << l);
  return code;
}

}  // namespace deeprandom
