#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "deeprandom/core.hpp"
#include "deeprandom/rng.hpp"

namespace deeprandom {

/// A permutation of {0..n-1}, stored as the mapping used by apply():
/// apply(sigma, v)[l] = v[sigma[l]]. Serialized 1-based.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
    validate();
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    return Permutation(std::move(m));
  }

  static Permutation random(std::size_t n, Rng& rng) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    rng.shuffle(m);
    return Permutation(std::move(m));
  }

  std::size_t size() const { return map_.size(); }
  std::size_t operator[](std::size_t l) const { return map_[l]; }
  const std::vector<std::size_t>& mapping() const { return map_; }

  Permutation inverse() const {
    std::vector<std::size_t> inv(map_.size());
    for (std::size_t l = 0; l < map_.size(); ++l) inv[map_[l]] = l;
    return Permutation(std::move(inv));
  }

  friend bool operator==(const Permutation& a, const Permutation& b) {
    return a.map_ == b.map_;
  }
  /// Lexicographic order on the mapping; used for deterministic tie-breaks.
  friend bool operator<(const Permutation& a, const Permutation& b) {
    return a.map_ < b.map_;
  }

 private:
  void validate() const {
    std::vector<bool> seen(map_.size(), false);
    for (std::size_t v : map_) {
      require(v < map_.size(), "permutation entry out of range");
      require(!seen[v], "permutation entry repeated");
      seen[v] = true;
    }
  }

  std::vector<std::size_t> map_;
};

template <typename T>
std::vector<T> apply_permutation(const Permutation& sigma, const std::vector<T>& v) {
  require(sigma.size() == v.size(), "apply_permutation: length mismatch");
  std::vector<T> out(v.size());
  for (std::size_t l = 0; l < v.size(); ++l) out[l] = v[sigma[l]];
  return out;
}

/// Composition in the action sense:
/// apply(compose(a, b), v) == apply(a, apply(b, v)).
inline Permutation compose(const Permutation& a, const Permutation& b) {
  require(a.size() == b.size(), "compose: size mismatch");
  std::vector<std::size_t> m(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) m[l] = b[a[l]];
  return Permutation(std::move(m));
}

/// Enumerates all n! permutations in lexicographic mapping order. Guarded to
/// n <= 8 (40320 elements); beyond that the orbit is not enumerable here.
inline std::vector<Permutation> all_permutations(std::size_t n) {
  require(n <= 8, "all_permutations: n > 8 not enumerable");
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  std::vector<Permutation> out;
  do {
    out.push_back(Permutation(m));
  } while (std::next_permutation(m.begin(), m.end()));
  return out;
}

/// The permutation that sorts `v` into descending order, ties broken by
/// smallest original index first: apply(result, v) is non-increasing.
inline Permutation sort_descending_permutation(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return Permutation(std::move(idx));
}

}  // namespace deeprandom
