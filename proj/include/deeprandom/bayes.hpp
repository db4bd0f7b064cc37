#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "deeprandom/channel.hpp"
#include "deeprandom/core.hpp"
#include "deeprandom/distribution.hpp"
#include "deeprandom/permutation.hpp"

namespace deeprandom {

inline constexpr std::size_t kMaxOracleDim = 4;
inline constexpr std::size_t kMaxOracleComponents = 10000;
inline constexpr double kDegenerateMse = 1e-15;

/// One component of a joint prior over (x, y): independent boxes for x and y
/// within the component. Mixtures of such components express arbitrary
/// correlation between x and y.
struct JointComponent {
  double weight = 1.0;
  BoxComponent x;
  BoxComponent y;
};

class JointDistribution {
 public:
  JointDistribution() = default;

  JointDistribution(std::size_t n, std::vector<JointComponent> comps)
      : n_(n), comps_(std::move(comps)) {
    validate();
  }

  /// Product prior of two independent marginals.
  static JointDistribution product(const DiscreteDistribution& phi_x,
                                   const DiscreteDistribution& phi_y) {
    require(phi_x.dim() == phi_y.dim(), "product: dimension mismatch");
    std::vector<JointComponent> comps;
    for (const auto& cx : phi_x.components())
      for (const auto& cy : phi_y.components())
        comps.push_back(JointComponent{cx.weight * cy.weight, cx, cy});
    return JointDistribution(phi_x.dim(), std::move(comps));
  }

  static JointDistribution dirac_pair(const ParamVector& x, const ParamVector& y) {
    require(x.size() == y.size(), "dirac_pair: length mismatch");
    return JointDistribution(
        x.size(), {JointComponent{1.0, BoxComponent{1.0, x, 0.0}, BoxComponent{1.0, y, 0.0}}});
  }

  /// Uniform mixture of several joint distributions (all same dimension).
  static JointDistribution uniform_mixture(const std::vector<JointDistribution>& members) {
    require(!members.empty(), "uniform_mixture: empty family");
    const double scale = 1.0 / static_cast<double>(members.size());
    std::vector<JointComponent> comps;
    for (const auto& m : members) {
      require(m.dim() == members.front().dim(), "uniform_mixture: dimension mismatch");
      for (auto c : m.components()) {
        c.weight *= scale;
        comps.push_back(std::move(c));
      }
    }
    return JointDistribution(members.front().dim(), std::move(comps));
  }

  std::size_t dim() const { return n_; }
  const std::vector<JointComponent>& components() const { return comps_; }

  DiscreteDistribution marginal_x() const {
    std::vector<BoxComponent> out;
    for (const auto& c : comps_) out.push_back(BoxComponent{c.weight, c.x.center, c.x.width});
    return DiscreteDistribution(n_, std::move(out)).merged();
  }

  DiscreteDistribution marginal_y() const {
    std::vector<BoxComponent> out;
    for (const auto& c : comps_) out.push_back(BoxComponent{c.weight, c.y.center, c.y.width});
    return DiscreteDistribution(n_, std::move(out)).merged();
  }

  /// E_J[phi(x, y)]; exact (independent boxes within each component).
  double prior_phi_mean() const {
    double s = 0.0;
    for (const auto& c : comps_) {
      double t = 0.0;
      for (std::size_t l = 0; l < n_; ++l) t += c.x.center[l] * c.y.center[l];
      s += c.weight * t / static_cast<double>(n_);
    }
    return s;
  }

 private:
  void validate() const {
    require(n_ >= 1, "joint distribution dimension must be >= 1");
    require(!comps_.empty(), "joint distribution needs components");
    double total = 0.0;
    for (const auto& c : comps_) {
      require(c.weight > 0.0, "joint component weight must be positive");
      require(c.x.center.size() == n_ && c.y.center.size() == n_,
              "joint component has wrong dimension");
      total += c.weight;
    }
    require(std::abs(total - 1.0) <= 1e-12, "joint weights must sum to 1");
  }

  std::size_t n_ = 0;
  std::vector<JointComponent> comps_;
};

/// What the opponent estimates. InnerProduct is phi = x.y/n (scalar);
/// IdentityX is phi = x itself (vector in R^n), used for distinguishability
/// of the x-marginals.
enum class EvalKind { InnerProduct, IdentityX };

namespace detail {

/// Exact integrals of x^d * Bern(bit; x/k) over a centred uniform interval,
/// d = 0, 1, 2. The Bernoulli factor is affine in x, so all three reduce to
/// moments of the uniform law: E[x]=c, E[x^2]=c^2+w^2/12, E[x^3]=c^3+c w^2/4.
struct CoordMoments {
  double m0, m1, m2;
};

inline CoordMoments coord_moments(double c, double w, int bit, double k) {
  const double a = bit ? 0.0 : 1.0;
  const double b = bit ? 1.0 / k : -1.0 / k;
  const double mu2 = c * c + w * w / 12.0;
  const double mu3 = c * c * c + c * w * w / 4.0;
  return {a + b * c, a * c + b * mu2, a * mu2 + b * mu3};
}

/// Per-component, per-outcome integrals against the channel likelihood.
struct ComponentIntegrals {
  double evidence = 0.0;               // int P(i|x/k) P(j|y/k) dBox
  std::vector<double> phi_lik;         // int phi * P * P (one entry per phi coordinate)
  double phi_sq_lik = 0.0;             // int ||phi||^2 * P * P
};

inline ComponentIntegrals component_integrals(const JointComponent& comp, const Bits& i,
                                              const Bits& j, double k, EvalKind kind) {
  const std::size_t n = comp.x.center.size();
  std::vector<CoordMoments> mx(n), my(n);
  for (std::size_t l = 0; l < n; ++l) {
    mx[l] = coord_moments(comp.x.center[l], comp.x.width, i[l], k);
    my[l] = coord_moments(comp.y.center[l], comp.y.width, j[l], k);
  }
  // Prefix/suffix products of the per-coordinate evidence factors; avoids
  // dividing by factors that may be exactly zero.
  std::vector<double> p(n), pre(n + 1, 1.0), suf(n + 1, 1.0);
  for (std::size_t l = 0; l < n; ++l) p[l] = mx[l].m0 * my[l].m0;
  for (std::size_t l = 0; l < n; ++l) pre[l + 1] = pre[l] * p[l];
  for (std::size_t l = n; l > 0; --l) suf[l - 1] = suf[l] * p[l - 1];

  ComponentIntegrals out;
  out.evidence = pre[n];

  if (kind == EvalKind::InnerProduct) {
    const double dn = static_cast<double>(n);
    double lin = 0.0;
    for (std::size_t l = 0; l < n; ++l)
      lin += mx[l].m1 * my[l].m1 * pre[l] * suf[l + 1];
    out.phi_lik = {lin / dn};

    double quad = 0.0;
    for (std::size_t l = 0; l < n; ++l)
      quad += mx[l].m2 * my[l].m2 * pre[l] * suf[l + 1];
    for (std::size_t l = 0; l < n; ++l) {
      double mid = 1.0;
      for (std::size_t m = l + 1; m < n; ++m) {
        quad += 2.0 * (mx[l].m1 * my[l].m1) * (mx[m].m1 * my[m].m1) * pre[l] * mid * suf[m + 1];
        mid *= p[m];
      }
    }
    out.phi_sq_lik = quad / (dn * dn);
  } else {  // IdentityX: phi(x, y) = x, vector-valued
    std::vector<double> px(n), prex(n + 1, 1.0), sufx(n + 1, 1.0);
    double ally = 1.0;
    for (std::size_t l = 0; l < n; ++l) {
      px[l] = mx[l].m0;
      ally *= my[l].m0;
    }
    for (std::size_t l = 0; l < n; ++l) prex[l + 1] = prex[l] * px[l];
    for (std::size_t l = n; l > 0; --l) sufx[l - 1] = sufx[l] * px[l - 1];
    out.phi_lik.resize(n);
    double quad = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      out.phi_lik[d] = mx[d].m1 * prex[d] * sufx[d + 1] * ally;
      quad += mx[d].m2 * prex[d] * sufx[d + 1] * ally;
    }
    out.phi_sq_lik = quad;
  }
  return out;
}

inline std::vector<double> prior_eval_mean(const JointDistribution& joint, EvalKind kind) {
  if (kind == EvalKind::InnerProduct) return {joint.prior_phi_mean()};
  std::vector<double> m(joint.dim(), 0.0);
  for (const auto& c : joint.components())
    for (std::size_t l = 0; l < joint.dim(); ++l) m[l] += c.weight * c.x.center[l];
  return m;
}

inline void check_oracle_size(const JointDistribution& joint) {
  require(joint.dim() <= kMaxOracleDim, "oracle: n > 4 not enumerable");
  require(joint.components().size() <= kMaxOracleComponents,
          "oracle: too many quadrature components");
}

}  // namespace detail

struct PosteriorResult {
  std::vector<double> value;  // posterior mean of the evaluation (1 or n entries)
  bool zero_evidence = false; // outcome impossible under the prior; value is the prior mean
};

/// Posterior mean of the evaluation given the observed pair (i, j):
/// sum phi P(i,j|x,y) J / sum P(i,j|x,y) J, computed exactly per component.
inline PosteriorResult posterior_mean(const JointDistribution& joint, const Bits& i,
                                      const Bits& j, double k,
                                      EvalKind kind = EvalKind::InnerProduct) {
  detail::check_oracle_size(joint);
  require(i.size() == joint.dim() && j.size() == joint.dim(),
          "posterior_mean: outcome dimension mismatch");
  check_degradation_factor(k);
  double ev = 0.0;
  std::vector<double> num(kind == EvalKind::InnerProduct ? 1 : joint.dim(), 0.0);
  for (const auto& comp : joint.components()) {
    auto ci = detail::component_integrals(comp, i, j, k, kind);
    ev += comp.weight * ci.evidence;
    for (std::size_t d = 0; d < num.size(); ++d) num[d] += comp.weight * ci.phi_lik[d];
  }
  if (ev <= 0.0) return {detail::prior_eval_mean(joint, kind), true};
  for (auto& v : num) v /= ev;
  return {std::move(num), false};
}

/// Opponent strategy as a dense table over all 2^(2n) outcomes.
/// Index layout: (j_code << n) | i_code, little-endian bit codes.
struct StrategyTable {
  std::size_t n = 0;
  std::vector<double> values;

  StrategyTable() = default;
  explicit StrategyTable(std::size_t dim)
      : n(dim), values(std::size_t{1} << (2 * dim), 0.0) {}

  std::size_t index(std::uint32_t i_code, std::uint32_t j_code) const {
    return (static_cast<std::size_t>(j_code) << n) | i_code;
  }
  double at(std::uint32_t i_code, std::uint32_t j_code) const {
    return values[index(i_code, j_code)];
  }
  double& at(std::uint32_t i_code, std::uint32_t j_code) {
    return values[index(i_code, j_code)];
  }
};

/// Builds the table omega_T(i, j) = k^2 (i.j)/n over all outcomes.
inline StrategyTable omega_t_table(std::size_t n, double k) {
  StrategyTable t(n);
  for (std::uint32_t ic = 0; ic < (1u << n); ++ic)
    for (std::uint32_t jc = 0; jc < (1u << n); ++jc)
      t.at(ic, jc) = omega_t(bits_from_code(ic, n), bits_from_code(jc, n), k);
  return t;
}

/// Exact E over J and the channel of (omega(i,j) - phi(x,y))^2.
inline double strategy_mse(const StrategyTable& omega, const JointDistribution& joint,
                           double k) {
  detail::check_oracle_size(joint);
  require(omega.n == joint.dim(), "strategy_mse: table dimension mismatch");
  require(omega.values.size() == (std::size_t{1} << (2 * omega.n)),
          "strategy_mse: table does not cover all outcomes");
  const std::size_t n = joint.dim();
  double total = 0.0;
  for (std::uint32_t ic = 0; ic < (1u << n); ++ic) {
    const Bits i = bits_from_code(ic, n);
    for (std::uint32_t jc = 0; jc < (1u << n); ++jc) {
      const Bits j = bits_from_code(jc, n);
      const double w = omega.at(ic, jc);
      for (const auto& comp : joint.components()) {
        auto ci = detail::component_integrals(comp, i, j, k, EvalKind::InnerProduct);
        total += comp.weight *
                 (w * w * ci.evidence - 2.0 * w * ci.phi_lik[0] + ci.phi_sq_lik);
      }
    }
  }
  return total;
}

/// Tabulates the posterior mean at every outcome (the MMSE strategy) and its
/// mean squared error. Zero-evidence outcomes get the prior mean E_J[phi].
inline std::pair<StrategyTable, double> mmse_strategy(const JointDistribution& joint,
                                                      double k) {
  detail::check_oracle_size(joint);
  const std::size_t n = joint.dim();
  StrategyTable table(n);
  const double prior = joint.prior_phi_mean();
  double mse = 0.0;
  for (std::uint32_t ic = 0; ic < (1u << n); ++ic) {
    const Bits i = bits_from_code(ic, n);
    for (std::uint32_t jc = 0; jc < (1u << n); ++jc) {
      const Bits j = bits_from_code(jc, n);
      double ev = 0.0, num = 0.0, sq = 0.0;
      for (const auto& comp : joint.components()) {
        auto ci = detail::component_integrals(comp, i, j, k, EvalKind::InnerProduct);
        ev += comp.weight * ci.evidence;
        num += comp.weight * ci.phi_lik[0];
        sq += comp.weight * ci.phi_sq_lik;
      }
      if (ev > 0.0) {
        table.at(ic, jc) = num / ev;
        mse += sq - num * num / ev;
      } else {
        table.at(ic, jc) = prior;
      }
    }
  }
  return {std::move(table), mse};
}

/// Minimum mean squared error for a possibly vector-valued evaluation; the
/// strategy itself is not materialized.
inline double mmse_value(const JointDistribution& joint, double k, EvalKind kind) {
  detail::check_oracle_size(joint);
  const std::size_t n = joint.dim();
  double mse = 0.0;
  for (std::uint32_t ic = 0; ic < (1u << n); ++ic) {
    const Bits i = bits_from_code(ic, n);
    for (std::uint32_t jc = 0; jc < (1u << n); ++jc) {
      const Bits j = bits_from_code(jc, n);
      double ev = 0.0, sq = 0.0;
      std::vector<double> num(kind == EvalKind::InnerProduct ? 1 : n, 0.0);
      for (const auto& comp : joint.components()) {
        auto ci = detail::component_integrals(comp, i, j, k, kind);
        ev += comp.weight * ci.evidence;
        sq += comp.weight * ci.phi_sq_lik;
        for (std::size_t d = 0; d < num.size(); ++d) num[d] += comp.weight * ci.phi_lik[d];
      }
      if (ev > 0.0) {
        double nsq = 0.0;
        for (double v : num) nsq += v * v;
        mse += sq - nsq / ev;
      }
    }
  }
  return mse;
}

struct DegradationReport {
  double mse_unbiased = 0.0;  // exact MSE of omega_T
  double mmse = 0.0;
  double ratio = 0.0;         // mse_unbiased / mmse; meaningless when degenerate
  bool degenerate = false;    // mmse ~ 0 (e.g. Dirac prior), ratio undefined
  bool is_degradation = false;
};

/// Compares the unbiased estimator against the Bayes optimum. The transform
/// is flagged a Degradation when the ratio strictly exceeds 1.
inline DegradationReport check_degradation(const JointDistribution& joint, double k) {
  DegradationReport rep;
  rep.mse_unbiased = strategy_mse(omega_t_table(joint.dim(), k), joint, k);
  rep.mmse = mmse_strategy(joint, k).second;
  if (rep.mmse <= kDegenerateMse) {
    rep.degenerate = true;
    rep.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.ratio = rep.mse_unbiased / rep.mmse;
    rep.is_degradation = rep.ratio > 1.0;
  }
  return rep;
}

/// Group element acting on joint priors: (x, y) -> (apply(first, x), apply(second, y)).
using JointGroupElement = std::pair<Permutation, Permutation>;

inline JointDistribution permute_joint(const JointDistribution& joint,
                                       const JointGroupElement& tau) {
  std::vector<JointComponent> comps(joint.components());
  for (auto& c : comps) {
    c.x.center = apply_permutation(tau.first, c.x.center);
    c.y.center = apply_permutation(tau.second, c.y.center);
  }
  return JointDistribution(joint.dim(), std::move(comps));
}

/// The common-permutation group {(sigma, sigma)} on (x, y); n <= 8.
inline std::vector<JointGroupElement> common_permutation_group(std::size_t n) {
  std::vector<JointGroupElement> g;
  for (const auto& sigma : all_permutations(n)) g.emplace_back(sigma, sigma);
  return g;
}

/// (1/|G|) sum over tau in G of the tau-pushforward of J; the opponent's
/// restricted prior R_G. G must contain the identity and be closed under
/// composition.
inline JointDistribution group_average(const JointDistribution& joint,
                                       const std::vector<JointGroupElement>& group) {
  require(!group.empty(), "group_average: empty group");
  auto contains = [&](const JointGroupElement& e) {
    for (const auto& g : group)
      if (g.first == e.first && g.second == e.second) return true;
    return false;
  };
  require(contains({Permutation::identity(joint.dim()), Permutation::identity(joint.dim())}),
          "group_average: group must contain the identity");
  for (const auto& a : group)
    for (const auto& b : group)
      require(contains({compose(a.first, b.first), compose(a.second, b.second)}),
              "group_average: set not closed under composition");

  const double scale = 1.0 / static_cast<double>(group.size());
  std::map<std::tuple<ParamVector, double, ParamVector, double>, double> acc;
  for (const auto& tau : group) {
    auto moved = permute_joint(joint, tau);
    for (const auto& c : moved.components())
      acc[{c.x.center, c.x.width, c.y.center, c.y.width}] += scale * c.weight;
  }
  std::vector<JointComponent> comps;
  for (const auto& [key, w] : acc)
    comps.push_back(JointComponent{w,
                                   BoxComponent{1.0, std::get<0>(key), std::get<1>(key)},
                                   BoxComponent{1.0, std::get<2>(key), std::get<3>(key)}});
  return JointDistribution(joint.dim(), std::move(comps));
}

struct IndistReport {
  double lhs = 0.0;   // MMSE of the uniform mixture
  double rhs = 0.0;   // average of per-member MMSEs
  double ratio = 0.0; // lhs/rhs; +inf when rhs ~ 0 < lhs, 1 when both ~ 0
  double alpha = 0.0;
  bool pass = false;  // lhs > alpha * rhs
  bool degenerate = false;  // some member has ~zero MMSE
};

/// alpha-undistinguishability check: the best single strategy against the
/// family mixture must be at least alpha times worse than knowing the member.
inline IndistReport check_indistinguishability(const std::vector<JointDistribution>& family,
                                               double k, double alpha,
                                               EvalKind kind = EvalKind::InnerProduct) {
  require(!family.empty() && family.size() <= 16, "check_indistinguishability: family size");
  require(alpha > 1.0, "check_indistinguishability: alpha must exceed 1");
  IndistReport rep;
  rep.alpha = alpha;
  double rhs = 0.0;
  for (const auto& member : family) {
    const double m = mmse_value(member, k, kind);
    if (m <= kDegenerateMse) rep.degenerate = true;
    rhs += m;
  }
  rep.rhs = rhs / static_cast<double>(family.size());
  rep.lhs = mmse_value(JointDistribution::uniform_mixture(family), k, kind);
  if (rep.rhs <= kDegenerateMse) {
    rep.ratio = rep.lhs <= kDegenerateMse ? 1.0
                                          : std::numeric_limits<double>::infinity();
    rep.degenerate = true;
  } else {
    rep.ratio = rep.lhs / rep.rhs;
  }
  rep.pass = rep.lhs > alpha * rep.rhs;
  return rep;
}

}  // namespace deeprandom
