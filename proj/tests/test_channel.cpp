#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "deeprandom/channel.hpp"
#include "deeprandom/core.hpp"
#include "deeprandom/permutation.hpp"
#include "deeprandom/rng.hpp"

using namespace deeprandom;

TEST_CASE("degrade_params") {
  ParamVector x{1.0, 0.5};
  CHECK(degrade_params(x, 1.0) == x);
  CHECK(degrade_params(x, 2.0) == ParamVector{0.5, 0.25});
  CHECK_THROWS_AS(degrade_params(x, 0.5), std::invalid_argument);

  Rng rng(3);
  ParamVector r(10);
  for (auto& v : r) v = rng.uniform();
  for (double v : degrade_params(r, 4.0)) CHECK(v <= 0.25);
}

TEST_CASE("bernoulli_draw endpoints and empirical mean") {
  Rng rng(17);
  CHECK(bernoulli_draw(ParamVector(8, 0.0), rng) == Bits(8, 0));
  CHECK(bernoulli_draw(ParamVector(8, 1.0), rng) == Bits(8, 1));
  CHECK_THROWS_AS(bernoulli_draw(ParamVector{1.2}, rng), std::invalid_argument);

  const ParamVector p{0.1, 0.5, 0.8};
  const int trials = 100000;
  std::vector<int> ones(3, 0);
  for (int t = 0; t < trials; ++t) {
    auto b = bernoulli_draw(p, rng);
    for (int l = 0; l < 3; ++l) ones[l] += b[l];
  }
  for (int l = 0; l < 3; ++l) {
    const double mean = static_cast<double>(ones[l]) / trials;
    const double tol = 3.0 * std::sqrt(p[l] * (1 - p[l]) / trials);
    CHECK(std::abs(mean - p[l]) <= tol);
  }
}

TEST_CASE("likelihood normalizes and reorders") {
  Rng rng(23);
  ParamVector x{0.3, 0.9, 0.6};
  double total = 0.0;
  for (std::uint32_t code = 0; code < 8; ++code)
    total += likelihood(bits_from_code(code, 3), x, 2.0);
  CHECK(total == Catch::Approx(1.0).margin(1e-12));

  CHECK(likelihood(Bits{0, 0}, ParamVector{1.0, 1.0}, 2.0) ==
        Catch::Approx(0.25).margin(1e-15));

  for (int trial = 0; trial < 20; ++trial) {
    ParamVector v(5);
    for (auto& c : v) c = rng.uniform();
    Bits i = bernoulli_draw(ParamVector(5, 0.5), rng);
    auto sigma = Permutation::random(5, rng);
    CHECK(likelihood(apply_permutation(sigma, i), apply_permutation(sigma, v), 3.0) ==
          Catch::Approx(likelihood(i, v, 3.0)).margin(1e-15));
  }
}

TEST_CASE("channel equivariance, exhaustive at n = 3") {
  const ParamVector x{0.2, 0.7, 0.5};
  for (const auto& sigma : all_permutations(3)) {
    for (std::uint32_t code = 0; code < 8; ++code) {
      const Bits i = bits_from_code(code, 3);
      CHECK(likelihood(apply_permutation(sigma, i), apply_permutation(sigma, x), 2.0) ==
            Catch::Approx(likelihood(i, x, 2.0)).margin(1e-15));
    }
  }
}

TEST_CASE("omega_t direct values") {
  CHECK(omega_t(Bits{1, 0}, Bits{0, 1}, 3.0) == 0.0);
  CHECK(omega_t(Bits{1, 1, 1, 1}, Bits{1, 1, 1, 1}, 2.0) == 4.0);
  CHECK_THROWS_AS(omega_t(Bits{1}, Bits{1, 0}, 2.0), std::invalid_argument);
}

TEST_CASE("omega_t is exactly unbiased, enumerated") {
  // E[omega_T] over the product channel equals phi(x, y) exactly.
  const ParamVector x{1.0, 0.5}, y{0.5, 1.0};
  const double k = 2.0;
  double expect = 0.0;
  for (std::uint32_t ic = 0; ic < 4; ++ic)
    for (std::uint32_t jc = 0; jc < 4; ++jc) {
      const Bits i = bits_from_code(ic, 2), j = bits_from_code(jc, 2);
      expect += likelihood(i, x, k) * likelihood(j, y, k) * omega_t(i, j, k);
    }
  CHECK(expect == Catch::Approx(evaluate_phi(x, y)).margin(1e-12));
}

TEST_CASE("omega_t unbiased over the 5-point grid, n <= 3") {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::size_t n = 2; n <= 3; ++n) {
    const std::uint32_t npts = 1;
    std::size_t total = 1;
    for (std::size_t l = 0; l < n; ++l) total *= grid.size();
    (void)npts;
    for (double k : {2.0, 4.0}) {
      for (std::size_t xi = 0; xi < total; ++xi) {
        for (std::size_t yi = 0; yi < total; ++yi) {
          ParamVector x(n), y(n);
          std::size_t a = xi, b = yi;
          for (std::size_t l = 0; l < n; ++l) {
            x[l] = grid[a % grid.size()];
            a /= grid.size();
            y[l] = grid[b % grid.size()];
            b /= grid.size();
          }
          double expect = 0.0;
          for (std::uint32_t ic = 0; ic < (1u << n); ++ic)
            for (std::uint32_t jc = 0; jc < (1u << n); ++jc) {
              const Bits i = bits_from_code(ic, n), j = bits_from_code(jc, n);
              expect += likelihood(i, x, k) * likelihood(j, y, k) * omega_t(i, j, k);
            }
          REQUIRE(expect == Catch::Approx(evaluate_phi(x, y)).margin(1e-10));
        }
      }
    }
  }
}

TEST_CASE("expected one-count decreases in k") {
  ParamVector x{0.9, 0.4, 0.7};
  double prev = l1_norm(x);
  for (double k : {2.0, 4.0, 8.0}) {
    const double expected_ones = l1_norm(degrade_params(x, k));
    CHECK(expected_ones < prev);
    prev = expected_ones;
  }
}

TEST_CASE("bit codes round-trip in fixed little-endian order") {
  CHECK(bits_from_code(1, 3) == Bits{1, 0, 0});
  CHECK(bits_from_code(4, 3) == Bits{0, 0, 1});
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const std::uint32_t code = static_cast<std::uint32_t>(rng.uniform_int(256));
    CHECK(code_from_bits(bits_from_code(code, 8)) == code);
  }
}
