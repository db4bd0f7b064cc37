#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "deeprandom/bayes.hpp"
#include "deeprandom/channel.hpp"
#include "deeprandom/core.hpp"
#include "deeprandom/distribution.hpp"
#include "deeprandom/rng.hpp"
#include "deeprandom/zeta.hpp"

namespace deeprandom {

struct DrgParams {
  std::size_t n = 2;
  double k = 2.0;
  std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  double alpha_gap = 1.2;
  double min_width = 0.02;  // smoothing width applied to emitted pairs
};

/// Recursive generator state. The counters are the primary entropy source:
/// they only ever increase, and each step's classical randomness is keyed by
/// (master_seed, counters). Serializable; identical state implies identical
/// continuation.
struct DrgState {
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> counters = {0, 0};
  std::uint64_t step = 0;
  std::vector<JointDistribution> history;
  std::vector<double> recorded_ratios;
  std::uint64_t random_bits_used = 0;
};

/// One mixture member of the opponent's view of the favorable-case channel:
/// a joint prior together with the tidying permutations its legitimate users
/// would apply. V_A = (1/n) sum_l x[sx(l)] j[sy(l)], V_B likewise with (i, y).
struct FavorableEntry {
  double weight = 1.0;
  JointDistribution dist;
  Permutation sigma_x, sigma_y;
};

inline FavorableEntry make_favorable_entry(JointDistribution dist, double weight = 1.0) {
  FavorableEntry e;
  e.weight = weight;
  e.sigma_x = tidying_permutation(dist.marginal_x());
  e.sigma_y = tidying_permutation(dist.marginal_y());
  e.dist = std::move(dist);
  return e;
}

namespace detail {

/// Exact channel integrals of 1, V_A, V_A^2 and (V_B - V_A)^2 against one
/// entry at one outcome. All terms are polynomials of degree <= 2 in single
/// coordinates, so the box moments make everything closed-form.
struct FavorableIntegrals {
  double evidence = 0.0;
  double va = 0.0;       // int V_A * P * P
  double va_sq = 0.0;    // int V_A^2 * P * P
  double gap_sq = 0.0;   // int (V_B - V_A)^2 * P * P
};

inline FavorableIntegrals favorable_integrals(const FavorableEntry& e, const Bits& i,
                                              const Bits& j, double k) {
  const std::size_t n = e.dist.dim();
  const double dn = static_cast<double>(n);
  FavorableIntegrals out;
  std::vector<CoordMoments> mx(n), my(n);
  for (const auto& comp : e.dist.components()) {
    for (std::size_t l = 0; l < n; ++l) {
      mx[l] = coord_moments(comp.x.center[l], comp.x.width, i[l], k);
      my[l] = coord_moments(comp.y.center[l], comp.y.width, j[l], k);
    }
    double all_x = 1.0, all_y = 1.0;
    for (std::size_t l = 0; l < n; ++l) {
      all_x *= mx[l].m0;
      all_y *= my[l].m0;
    }
    auto x_without = [&](std::size_t a) {
      double p = 1.0;
      for (std::size_t r = 0; r < n; ++r)
        if (r != a) p *= mx[r].m0;
      return p;
    };
    auto x_without2 = [&](std::size_t a, std::size_t b) {
      double p = 1.0;
      for (std::size_t r = 0; r < n; ++r)
        if (r != a && r != b) p *= mx[r].m0;
      return p;
    };
    auto y_without = [&](std::size_t a) {
      double p = 1.0;
      for (std::size_t r = 0; r < n; ++r)
        if (r != a) p *= my[r].m0;
      return p;
    };
    auto y_without2 = [&](std::size_t a, std::size_t b) {
      double p = 1.0;
      for (std::size_t r = 0; r < n; ++r)
        if (r != a && r != b) p *= my[r].m0;
      return p;
    };

    const double ev = all_x * all_y;
    double va = 0.0, va_sq = 0.0, vb_sq = 0.0, va_vb = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const std::size_t a = e.sigma_x[l];
      const double cl = j[e.sigma_y[l]] ? 1.0 : 0.0;
      if (cl != 0.0) va += mx[a].m1 * x_without(a) * all_y;
      const double dl = i[e.sigma_x[l]] ? 1.0 : 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        const std::size_t am = e.sigma_x[m];
        const std::size_t bm = e.sigma_y[m];
        const double cm = j[e.sigma_y[m]] ? 1.0 : 0.0;
        const double dm = i[e.sigma_x[m]] ? 1.0 : 0.0;
        if (cl != 0.0 && cm != 0.0) {
          va_sq += (l == m) ? mx[a].m2 * x_without(a) * all_y
                            : mx[a].m1 * mx[am].m1 * x_without2(a, am) * all_y;
        }
        if (dl != 0.0 && dm != 0.0) {
          const std::size_t bl = e.sigma_y[l];
          vb_sq += (l == m) ? my[bl].m2 * y_without(bl) * all_x
                            : my[bl].m1 * my[bm].m1 * y_without2(bl, bm) * all_x;
        }
        if (cl != 0.0 && dm != 0.0)
          va_vb += mx[a].m1 * x_without(a) * my[bm].m1 * y_without(bm);
      }
    }
    va /= dn;
    va_sq /= dn * dn;
    vb_sq /= dn * dn;
    va_vb /= dn * dn;
    out.evidence += comp.weight * ev;
    out.va += comp.weight * va;
    out.va_sq += comp.weight * va_sq;
    out.gap_sq += comp.weight * (vb_sq - 2.0 * va_vb + va_sq);
  }
  return out;
}

}  // namespace detail

/// Exact E[(omega - V_A)^2] and E[(V_B - V_A)^2] of a strategy table against
/// a mixture of favorable-channel entries.
struct GapStats {
  double opponent_mse = 0.0;
  double legit_gap = 0.0;
  double ratio = 0.0;
};

inline GapStats favorable_gap(const StrategyTable& omega,
                              const std::vector<FavorableEntry>& entries, double k) {
  require(!entries.empty(), "favorable_gap: no entries");
  const std::size_t n = entries.front().dist.dim();
  require(omega.n == n, "favorable_gap: table dimension mismatch");
  GapStats g;
  for (std::uint32_t ic = 0; ic < (1u << n); ++ic) {
    const Bits i = bits_from_code(ic, n);
    for (std::uint32_t jc = 0; jc < (1u << n); ++jc) {
      const Bits j = bits_from_code(jc, n);
      const double w = omega.at(ic, jc);
      for (const auto& e : entries) {
        auto fi = detail::favorable_integrals(e, i, j, k);
        g.opponent_mse += e.weight * (w * w * fi.evidence - 2.0 * w * fi.va + fi.va_sq);
        g.legit_gap += e.weight * fi.gap_sq;
      }
    }
  }
  if (g.legit_gap <= 1e-300)
    g.ratio = g.opponent_mse > 1e-300 ? std::numeric_limits<double>::infinity() : 0.0;
  else
    g.ratio = g.opponent_mse / g.legit_gap;
  return g;
}

/// The opponent's best strategy against a known mixture of favorable-channel
/// entries: the posterior mean of V_A at every outcome (prior mean where the
/// outcome has no mass).
inline StrategyTable best_response_entries(const std::vector<FavorableEntry>& entries,
                                           double k) {
  require(!entries.empty(), "best_response: no entries");
  const std::size_t n = entries.front().dist.dim();
  require(n <= kMaxOracleDim, "best_response: n > 4 not enumerable");
  StrategyTable table(n);
  double prior = 0.0;
  std::vector<std::pair<double, double>> cells(table.values.size(), {0.0, 0.0});
  for (std::uint32_t ic = 0; ic < (1u << n); ++ic) {
    const Bits i = bits_from_code(ic, n);
    for (std::uint32_t jc = 0; jc < (1u << n); ++jc) {
      const Bits j = bits_from_code(jc, n);
      auto& cell = cells[table.index(ic, jc)];
      for (const auto& e : entries) {
        auto fi = detail::favorable_integrals(e, i, j, k);
        cell.first += e.weight * fi.evidence;
        cell.second += e.weight * fi.va;
      }
      prior += cell.second;
    }
  }
  for (std::size_t t = 0; t < cells.size(); ++t)
    table.values[t] = cells[t].first > 0.0 ? cells[t].second / cells[t].first : prior;
  return table;
}

/// Entries for the uniform prior over all grid pairs; the opponent's view
/// before any history exists.
inline std::vector<FavorableEntry> grid_prior_entries(const DrgParams& p) {
  std::vector<ParamVector> points;
  std::size_t total = 1;
  for (std::size_t l = 0; l < p.n; ++l) total *= p.grid.size();
  for (std::size_t c = 0; c < total; ++c) {
    ParamVector x(p.n);
    std::size_t a = c;
    for (std::size_t l = 0; l < p.n; ++l) {
      x[l] = p.grid[a % p.grid.size()];
      a /= p.grid.size();
    }
    points.push_back(x);
  }
  std::vector<FavorableEntry> entries;
  const double w = 1.0 / (static_cast<double>(total) * static_cast<double>(total));
  for (const auto& x : points)
    for (const auto& y : points)
      entries.push_back(make_favorable_entry(JointDistribution::dirac_pair(x, y), w));
  return entries;
}

inline std::vector<FavorableEntry> history_entries(const std::vector<JointDistribution>& hist) {
  std::vector<FavorableEntry> entries;
  const double w = 1.0 / static_cast<double>(hist.size());
  for (const auto& h : hist) entries.push_back(make_favorable_entry(h, w));
  return entries;
}

/// Best possible strategy knowing all past distributions: the MMSE table of
/// the uniform mixture of the history (uniform grid prior when empty).
inline StrategyTable best_response(const std::vector<JointDistribution>& history,
                                   const DrgParams& p) {
  if (history.empty()) return best_response_entries(grid_prior_entries(p), p.k);
  return best_response_entries(history_entries(history), p.k);
}

struct DefeatCandidate {
  ParamVector x, y;
  double ratio = 0.0;
};

struct DefeatResult {
  ParamVector x, y;        // argmax-ratio grid pair
  double ratio = 0.0;
  bool shortfall = false;  // no grid pair reached alpha_gap
  std::vector<DefeatCandidate> qualifying;
};

/// Exhaustive grid search for a Dirac pair on which the given strategy is at
/// least alpha_gap times worse than the legitimate parties' quadratic gap,
/// both sides enumerated exactly over the favorable-case channel.
inline DefeatResult defeating_pair(const StrategyTable& omega, double alpha_gap,
                                   const DrgParams& p) {
  require(!p.grid.empty(), "defeating_pair: empty grid");
  require(alpha_gap > 1.0, "defeating_pair: alpha_gap must exceed 1");
  std::size_t total = 1;
  for (std::size_t l = 0; l < p.n; ++l) total *= p.grid.size();
  std::vector<ParamVector> points;
  for (std::size_t c = 0; c < total; ++c) {
    ParamVector x(p.n);
    std::size_t a = c;
    for (std::size_t l = 0; l < p.n; ++l) {
      x[l] = p.grid[a % p.grid.size()];
      a /= p.grid.size();
    }
    points.push_back(x);
  }
  DefeatResult res;
  double best = -1.0;
  for (const auto& x : points) {
    for (const auto& y : points) {
      std::vector<FavorableEntry> one{
          make_favorable_entry(JointDistribution::dirac_pair(x, y))};
      const auto g = favorable_gap(omega, one, p.k);
      if (g.ratio > best) {
        best = g.ratio;
        res.x = x;
        res.y = y;
        res.ratio = g.ratio;
      }
      if (g.ratio >= alpha_gap) res.qualifying.push_back({x, y, g.ratio});
    }
  }
  res.shortfall = res.qualifying.empty();
  return res;
}

/// Widens a Dirac pair into min_width boxes (clamped inside the unit cube).
inline JointDistribution widen_pair(const ParamVector& x, const ParamVector& y,
                                    double width) {
  auto clampv = [&](ParamVector v) {
    for (auto& c : v) c = std::clamp(c, width / 2, 1.0 - width / 2);
    return v;
  };
  return JointDistribution(
      x.size(), {JointComponent{1.0, BoxComponent{1.0, clampv(x), width},
                                BoxComponent{1.0, clampv(y), width}}});
}

/// One recursive step: computes the best response to the history, picks a
/// defeating pair through classical randomness keyed by the counters, widens
/// it to the width floor, re-verifies the ratio after widening, and appends.
inline JointDistribution drg_next(DrgState& state, const DrgParams& p) {
  auto omega = best_response(state.history, p);
  auto found = defeating_pair(omega, p.alpha_gap, p);

  Rng rng(Rng::derive(state.master_seed, state.counters[0],
                      state.counters.size() > 1 ? state.counters[1] : 0));
  std::uint64_t draws = 1;
  const std::uint64_t start = rng.next_u64();

  JointDistribution chosen = widen_pair(found.x, found.y, p.min_width);
  double chosen_ratio = 0.0;
  bool shortfall = found.shortfall;
  if (!found.qualifying.empty()) {
    bool accepted = false;
    const std::size_t m = found.qualifying.size();
    for (std::size_t probe = 0; probe < m && !accepted; ++probe) {
      const auto& cand = found.qualifying[(start + probe) % m];
      auto widened = widen_pair(cand.x, cand.y, p.min_width);
      std::vector<FavorableEntry> one{make_favorable_entry(widened)};
      const auto g = favorable_gap(omega, one, p.k);
      if (g.ratio >= p.alpha_gap) {
        chosen = std::move(widened);
        chosen_ratio = g.ratio;
        accepted = true;
      }
    }
    if (!accepted) {
      shortfall = true;
      std::vector<FavorableEntry> one{make_favorable_entry(chosen)};
      chosen_ratio = favorable_gap(omega, one, p.k).ratio;
    }
  } else {
    std::vector<FavorableEntry> one{make_favorable_entry(chosen)};
    chosen_ratio = favorable_gap(omega, one, p.k).ratio;
  }
  if (shortfall)
    throw std::runtime_error("drg_next: no grid pair defeats the current best response");

  state.history.push_back(chosen);
  state.recorded_ratios.push_back(chosen_ratio);
  state.step += 1;
  for (std::size_t c = 0; c < state.counters.size(); ++c)
    state.counters[c] += (c == 0 ? 1 : draws);
  state.random_bits_used += 64 * draws;
  return chosen;
}

struct AuditReport {
  std::uint64_t steps = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  std::vector<double> replayed_ratios;
  std::uint64_t shortfalls = 0;   // steps whose replayed ratio < alpha_gap
  std::uint64_t mismatches = 0;   // replayed ratio differs from the recorded one
  bool pass = true;
};

/// Replays the history: for each step m, rebuilds the best response to the
/// prefix and re-derives the achieved ratio of the emitted distribution.
inline AuditReport drg_audit(const DrgState& state, const DrgParams& p) {
  require(state.history.size() == state.step, "drg_audit: corrupted state");
  AuditReport rep;
  rep.steps = state.step;
  std::vector<JointDistribution> prefix;
  for (std::size_t m = 0; m < state.history.size(); ++m) {
    auto omega = best_response(prefix, p);
    std::vector<FavorableEntry> one{make_favorable_entry(state.history[m])};
    const double ratio = favorable_gap(omega, one, p.k).ratio;
    rep.replayed_ratios.push_back(ratio);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    if (ratio < p.alpha_gap) rep.shortfalls += 1;
    if (m < state.recorded_ratios.size() &&
        std::abs(ratio - state.recorded_ratios[m]) > 1e-9)
      rep.mismatches += 1;
    prefix.push_back(state.history[m]);
  }
  if (state.history.empty()) rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.pass = rep.shortfalls == 0 && rep.mismatches == 0;
  return rep;
}

}  // namespace deeprandom
