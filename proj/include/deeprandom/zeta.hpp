#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "deeprandom/core.hpp"
#include "deeprandom/distribution.hpp"
#include "deeprandom/permutation.hpp"
#include "deeprandom/rng.hpp"

namespace deeprandom {

/// Parameters of the compliant-distribution family: a floor on remoteness
/// from the symmetric projection and a floor on component widths (no Dirac
/// spikes). min_width <= 0 selects the dimension-scaled default 0.1/n.
struct ZetaParams {
  double alpha_remote = 0.4;
  double min_width = 0.0;
  int bumps = 2;

  double width_for(std::size_t n) const {
    return min_width > 0.0 ? min_width : 0.1 / static_cast<double>(n);
  }
};

namespace detail {

// Construction constants: each bump is a strictly descending template drawn
// inside a random band [mu - s, mu + s], then all bumps get one hidden
// coordinate relabeling. The spread s carries the alignment signal that only
// synchronized parties recover.
inline constexpr double kLevelLo = 0.25;
inline constexpr double kLevelHi = 0.75;
inline constexpr double kSpreadLo = 0.10;
inline constexpr double kSpreadHi = 0.35;

/// Strictly descending template with adjacent gaps >= w, confined to
/// [mu - s, mu + s] clipped into [w/2, 1 - w/2].
inline ParamVector descending_template(std::size_t n, double mu, double s, double w,
                                       Rng& rng) {
  const double lo = std::max(mu - s, w / 2);
  const double hi = std::min(mu + s, 1.0 - w / 2);
  const double budget = (hi - lo) - static_cast<double>(n - 1) * w;
  require(budget > 0.0, "zeta template: spread too small for the gap floor");
  std::vector<double> extra(n - 1);
  double total = 0.0;
  for (auto& e : extra) {
    e = rng.uniform();
    total += e;
  }
  const double frac = rng.uniform(0.2, 1.0);
  for (auto& e : extra) e *= budget * frac / total;
  const double start = lo + rng.uniform() * budget * (1.0 - frac);
  ParamVector t(n);
  double acc = start;
  for (std::size_t l = 0; l < n; ++l) {
    t[n - 1 - l] = acc;
    if (l + 1 < n) acc += w + extra[l];
  }
  return t;
}

/// Orbit-disjointness certificate: every bump's coordinates are pairwise
/// separated by >= width (so the bump is disjoint from its own permuted
/// copies), and sorted templates of distinct bumps differ somewhere by
/// >= width (bottleneck matching of sorted sequences is the identity, so
/// this separates whole orbits). When it holds, the mixture's remoteness is
/// exactly 1 - 1/n!.
inline bool orbit_disjoint(const std::vector<ParamVector>& templates, double w) {
  for (const auto& t : templates)
    for (std::size_t l = 1; l < t.size(); ++l)
      if (t[l - 1] - t[l] < w - 1e-12) return false;
  for (std::size_t a = 0; a < templates.size(); ++a)
    for (std::size_t b = a + 1; b < templates.size(); ++b) {
      double max_diff = 0.0;
      for (std::size_t l = 0; l < templates[a].size(); ++l)
        max_diff = std::max(max_diff, std::abs(templates[a][l] - templates[b][l]));
      if (max_diff < w - 1e-12) return false;
    }
  return true;
}

inline double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

struct ZetaDraw {
  std::vector<ParamVector> templates;  // descending, one per bump
  std::vector<double> weights;
  Permutation relabel;                 // hidden coordinate relabeling
};

inline ZetaDraw draw_zeta_candidate(const ZetaParams& p, std::size_t n, Rng& rng) {
  const double w = p.width_for(n);
  const double struct_min = 0.6 * static_cast<double>(n - 1) * w;
  ZetaDraw d;
  for (int b = 0; b < p.bumps; ++b) {
    const double s = rng.uniform(std::max(struct_min, kSpreadLo), kSpreadHi);
    double mu = rng.uniform(kLevelLo, kLevelHi);
    mu = std::clamp(mu, s + w / 2, 1.0 - s - w / 2);
    d.templates.push_back(descending_template(n, mu, s, w, rng));
  }
  d.weights.resize(p.bumps);
  double total = 0.0;
  for (auto& v : d.weights) {
    v = 0.2 + rng.uniform();
    total += v;
  }
  for (auto& v : d.weights) v /= total;
  d.relabel = Permutation::random(n, rng);
  return d;
}

inline DiscreteDistribution assemble(const ZetaDraw& d, std::size_t n, double w) {
  std::vector<BoxComponent> comps;
  for (std::size_t b = 0; b < d.templates.size(); ++b)
    comps.push_back(BoxComponent{d.weights[b],
                                 apply_permutation(d.relabel, d.templates[b]), w});
  return DiscreteDistribution(n, std::move(comps));
}

}  // namespace detail

/// Samples a compliant distribution: every component width >= the width
/// floor and remoteness(Phi) >= alpha_remote. Candidates are drawn with
/// strongly ordered coordinates and rejected until the floor is met; at
/// n <= 8 the floor is re-checked with the exact total-variation remoteness,
/// beyond that the orbit-disjointness certificate pins remoteness to
/// 1 - 1/n! exactly.
inline DiscreteDistribution sample_zeta(const ZetaParams& p, std::size_t n, Rng& rng) {
  require(p.bumps >= 1, "sample_zeta: bumps must be >= 1");
  require(p.alpha_remote >= 0.0 && p.alpha_remote < 1.0,
          "sample_zeta: alpha_remote must lie in [0,1)");
  require(n >= 2 || p.alpha_remote == 0.0,
          "sample_zeta: n = 1 has no asymmetric distributions (remoteness is always 0)");
  const double w = p.width_for(n);
  require(w > 0.0, "sample_zeta: width floor must be positive");
  require(static_cast<double>(n - 1) * w < 0.6,
          "sample_zeta: width floor too large for ordered coordinates");

  constexpr int kBudget = 10000;
  for (int attempt = 0; attempt < kBudget; ++attempt) {
    auto d = detail::draw_zeta_candidate(p, n, rng);
    auto phi = detail::assemble(d, n, w);
    if (p.alpha_remote == 0.0) return phi;
    if (detail::orbit_disjoint(d.templates, w)) {
      // remoteness is exactly 1 - 1/n! here
      if (1.0 - 1.0 / detail::factorial(n) >= p.alpha_remote) return phi;
      continue;
    }
    if (n <= 8 && remoteness(phi) >= p.alpha_remote) return phi;
  }
  throw std::runtime_error("sample_zeta: rejection budget exhausted");
}

/// Draws a compliant distribution whose per-bump coordinate sums sit at
/// `target_sum` (clamped to what the unit cube allows). Used for the
/// dispersion distributions, which must put mass near a prescribed band.
inline DiscreteDistribution sample_zeta_targeted(const ZetaParams& p, std::size_t n,
                                                 double target_sum, Rng& rng) {
  const double w = p.width_for(n);
  constexpr int kBudget = 10000;
  for (int attempt = 0; attempt < kBudget; ++attempt) {
    auto d = detail::draw_zeta_candidate(p, n, rng);
    for (auto& t : d.templates) {
      double sum = 0.0;
      for (double v : t) sum += v;
      double shift = (target_sum - sum) / static_cast<double>(n);
      // Uniform shifts preserve gaps; clamp so the boxes stay inside [0,1].
      shift = std::clamp(shift, w / 2 - t.back(), (1.0 - w / 2) - t.front());
      for (auto& v : t) v += shift;
    }
    auto phi = detail::assemble(d, n, w);
    if (p.alpha_remote == 0.0) return phi;
    if (detail::orbit_disjoint(d.templates, w)) {
      if (1.0 - 1.0 / detail::factorial(n) >= p.alpha_remote) return phi;
      continue;
    }
    if (n <= 8 && remoteness(phi) >= p.alpha_remote) return phi;
  }
  throw std::runtime_error("sample_zeta_targeted: rejection budget exhausted");
}

}  // namespace deeprandom
