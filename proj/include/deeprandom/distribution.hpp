#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "deeprandom/core.hpp"
#include "deeprandom/permutation.hpp"
#include "deeprandom/rng.hpp"

namespace deeprandom {

/// One mixture component: an axis-aligned cube of side `width` centred at
/// `center`, carrying probability mass `weight`. width == 0 is a Dirac.
struct BoxComponent {
  double weight = 1.0;
  ParamVector center;
  double width = 0.0;
};

/// Finite weighted mixture of axis-aligned uniform boxes over [0,1]^n.
/// Every box must lie inside the unit cube; weights sum to 1.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;

  DiscreteDistribution(std::size_t n, std::vector<BoxComponent> components)
      : n_(n), comps_(std::move(components)) {
    validate();
  }

  static DiscreteDistribution dirac(const ParamVector& x) {
    return DiscreteDistribution(x.size(), {BoxComponent{1.0, x, 0.0}});
  }

  std::size_t dim() const { return n_; }
  const std::vector<BoxComponent>& components() const { return comps_; }

  ParamVector mean_vector() const {
    ParamVector m(n_, 0.0);
    for (const auto& c : comps_)
      for (std::size_t l = 0; l < n_; ++l) m[l] += c.weight * c.center[l];
    return m;
  }

  /// Pushforward under sigma: samples x become apply(sigma, x). Component
  /// centers map to apply(sigma, center); widths are unchanged.
  DiscreteDistribution permute(const Permutation& sigma) const {
    require(sigma.size() == n_, "permute: dimension mismatch");
    std::vector<BoxComponent> out(comps_);
    for (auto& c : out) c.center = apply_permutation(sigma, c.center);
    return DiscreteDistribution(n_, std::move(out));
  }

  /// Merges components with identical (center, width), summing weights.
  DiscreteDistribution merged() const {
    std::map<std::pair<double, ParamVector>, double> acc;
    for (const auto& c : comps_) acc[{c.width, c.center}] += c.weight;
    std::vector<BoxComponent> out;
    out.reserve(acc.size());
    for (const auto& [key, w] : acc)
      out.push_back(BoxComponent{w, key.second, key.first});
    return DiscreteDistribution(n_, std::move(out));
  }

  ParamVector draw(Rng& rng) const {
    double u = rng.uniform();
    std::size_t pick = comps_.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      acc += comps_[i].weight;
      if (u < acc) {
        pick = i;
        break;
      }
    }
    const auto& c = comps_[pick];
    ParamVector x(n_);
    for (std::size_t l = 0; l < n_; ++l) {
      x[l] = c.center[l] + (c.width > 0.0 ? rng.uniform(-c.width / 2, c.width / 2) : 0.0);
      x[l] = std::clamp(x[l], 0.0, 1.0);
    }
    return x;
  }

 private:
  void validate() const {
    require(n_ >= 1, "distribution dimension must be >= 1");
    require(!comps_.empty(), "distribution needs at least one component");
    double total = 0.0;
    for (const auto& c : comps_) {
      require(c.weight > 0.0, "component weight must be positive");
      require(c.center.size() == n_, "component center has wrong dimension");
      require(c.width >= 0.0, "component width must be >= 0");
      for (double v : c.center) {
        require(v - c.width / 2 >= -kExactTol && v + c.width / 2 <= 1.0 + kExactTol,
                "component box must lie inside [0,1]^n");
      }
      total += c.weight;
    }
    require(std::abs(total - 1.0) <= 1e-12, "component weights must sum to 1");
  }

  std::size_t n_ = 0;
  std::vector<BoxComponent> comps_;
};

/// Uniform average of Phi over all coordinate permutations:
/// (1/n!) sum_sigma pushforward(Phi, sigma). Exact fixed point of every
/// coordinate permutation. Requires n <= 8 (orbit enumeration is n!-sized).
inline DiscreteDistribution symmetric_projection(const DiscreteDistribution& phi) {
  require(phi.dim() <= 8, "symmetric_projection: n > 8 not enumerable");
  const auto perms = all_permutations(phi.dim());
  const double inv = 1.0 / static_cast<double>(perms.size());
  std::map<std::pair<double, ParamVector>, double> acc;
  for (const auto& sigma : perms)
    for (const auto& c : phi.components())
      acc[{c.width, apply_permutation(sigma, c.center)}] += c.weight * inv;
  std::vector<BoxComponent> out;
  out.reserve(acc.size());
  for (const auto& [key, w] : acc) out.push_back(BoxComponent{w, key.second, key.first});
  return DiscreteDistribution(phi.dim(), std::move(out));
}

namespace detail {

struct WeightedBox {
  ParamVector center;
  double width = 0.0;
  double wf = 0.0;  // mass under the first distribution
  double wg = 0.0;  // mass under the second
};

inline bool boxes_overlap(const WeightedBox& a, const WeightedBox& b) {
  for (std::size_t l = 0; l < a.center.size(); ++l)
    if (std::abs(a.center[l] - b.center[l]) >= (a.width + b.width) / 2) return false;
  return true;
}

/// Exact integral of |f - g| over one connected cluster of overlapping boxes,
/// via the cell refinement induced by the boxes' edges. Both densities are
/// constant on every cell by construction.
inline double cluster_abs_integral(const std::vector<WeightedBox>& boxes) {
  const std::size_t n = boxes.front().center.size();
  std::vector<std::vector<double>> edges(n);
  for (const auto& b : boxes)
    for (std::size_t l = 0; l < n; ++l) {
      edges[l].push_back(b.center[l] - b.width / 2);
      edges[l].push_back(b.center[l] + b.width / 2);
    }
  double cell_count = 1.0;
  for (auto& e : edges) {
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    cell_count *= static_cast<double>(e.size() - 1);
  }
  require(cell_count <= double(1 << 22),
          "remoteness: refinement too large for exact evaluation");

  std::vector<double> dens(boxes.size());
  for (std::size_t b = 0; b < boxes.size(); ++b)
    dens[b] = 1.0 / std::pow(boxes[b].width, static_cast<double>(n));

  std::vector<std::size_t> idx(n, 0);
  double total = 0.0;
  while (true) {
    double vol = 1.0;
    ParamVector mid(n);
    for (std::size_t l = 0; l < n; ++l) {
      vol *= edges[l][idx[l] + 1] - edges[l][idx[l]];
      mid[l] = 0.5 * (edges[l][idx[l] + 1] + edges[l][idx[l]]);
    }
    if (vol > 0.0) {
      double f = 0.0, g = 0.0;
      for (std::size_t b = 0; b < boxes.size(); ++b) {
        bool inside = true;
        for (std::size_t l = 0; l < n && inside; ++l)
          inside = std::abs(mid[l] - boxes[b].center[l]) < boxes[b].width / 2;
        if (inside) {
          f += boxes[b].wf * dens[b];
          g += boxes[b].wg * dens[b];
        }
      }
      total += vol * std::abs(f - g);
    }
    std::size_t l = 0;
    while (l < n && ++idx[l] == edges[l].size() - 1) idx[l++] = 0;
    if (l == n) break;
  }
  return total;
}

/// Exact total-variation distance between two box mixtures. Dirac components
/// are singular with respect to the continuous part and are handled as atoms.
inline double total_variation(const DiscreteDistribution& f, const DiscreteDistribution& g) {
  require(f.dim() == g.dim(), "total_variation: dimension mismatch");
  const auto fm = f.merged();
  const auto gm = g.merged();
  std::map<std::pair<double, ParamVector>, std::pair<double, double>> acc;
  for (const auto& c : fm.components()) acc[{c.width, c.center}].first += c.weight;
  for (const auto& c : gm.components()) acc[{c.width, c.center}].second += c.weight;

  double atom_part = 0.0;
  std::vector<WeightedBox> boxes;
  for (const auto& [key, w] : acc) {
    if (key.first == 0.0)
      atom_part += std::abs(w.first - w.second);
    else
      boxes.push_back(WeightedBox{key.second, key.first, w.first, w.second});
  }

  // Union-find over overlapping boxes; non-overlapping boxes integrate to
  // |wf - wg| directly.
  std::vector<std::size_t> parent(boxes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      if (boxes_overlap(boxes[i], boxes[j])) parent[find(i)] = find(j);

  std::map<std::size_t, std::vector<WeightedBox>> clusters;
  for (std::size_t i = 0; i < boxes.size(); ++i)
    clusters[find(i)].push_back(boxes[i]);

  double box_part = 0.0;
  for (const auto& [root, cluster] : clusters) {
    if (cluster.size() == 1)
      box_part += std::abs(cluster.front().wf - cluster.front().wg);
    else
      box_part += cluster_abs_integral(cluster);
  }
  return 0.5 * (atom_part + box_part);
}

}  // namespace detail

/// Total-variation distance between Phi and its symmetric projection, in
/// [0,1]. Zero exactly when Phi is permutation-symmetric.
inline double remoteness(const DiscreteDistribution& phi) {
  return detail::total_variation(phi, symmetric_projection(phi));
}

/// The tidying permutation sigma_Phi: sorts the mean vector into descending
/// order (ties: smallest original index first). The canonical form
/// permute(Phi, sigma_Phi) has a non-increasing mean vector.
inline Permutation tidying_permutation(const DiscreteDistribution& phi) {
  return sort_descending_permutation(phi.mean_vector());
}

inline DiscreteDistribution canonical_form(const DiscreteDistribution& phi) {
  return phi.permute(tidying_permutation(phi));
}

}  // namespace deeprandom
