#include "support/oracles.hpp"
#include "treedyn/constructions.hpp"
#include "treedyn/spectral.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace treedyn;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

IntPoly poly(std::vector<Integer> c) { return IntPoly(std::move(c)); }

/// det(M - xE) from the Berkowitz oracle.
IntPoly reference_charpoly(const std::vector<std::vector<long long>>& m) {
  auto c = oracle::berkowitz(m);
  if (m.size() % 2 == 1)
    for (auto& x : c) x = -x;
  return poly(c);
}

const double golden_ratio = (1 + std::sqrt(5.0)) / 2;

}  // namespace

TEST_CASE("Berkowitz oracle sanity", "[spectral][oracle]") {
  // det(xI - [[1,1],[1,0]]) = x^2 - x - 1
  CHECK(oracle::berkowitz({{1, 1}, {1, 0}}) == std::vector<Integer>{-1, -1, 1});
  CHECK(oracle::berkowitz({{2, 0, 0}, {0, 3, 0}, {0, 0, 5}}) == std::vector<Integer>{-30, 31, -10, 1});
}

TEST_CASE("matrix profiles", "[spectral]") {
  auto swap = matrix_profile(SquareMatrix::from_rows({{0, 1}, {1, 0}}));
  CHECK(swap.irreducible);
  CHECK_FALSE(swap.primitive);
  CHECK(swap.period == 2);
  CHECK(swap.permutation);
  CHECK(swap.structurally_zero_entropy);

  auto gold = matrix_profile(SquareMatrix::from_rows({{1, 1}, {1, 0}}));
  CHECK(gold.irreducible);
  CHECK(gold.primitive);
  CHECK_FALSE(gold.permutation);
  CHECK_FALSE(gold.structurally_zero_entropy);

  auto comb = matrix_profile(comb_map(2).map.transition().matrix);
  CHECK_FALSE(comb.irreducible);
  CHECK(comb.structurally_zero_entropy);

  auto zero = matrix_profile(SquareMatrix(3));
  CHECK_FALSE(zero.irreducible);
  CHECK(zero.structurally_zero_entropy);
}

TEST_CASE("primitivity agrees with the matrix-power oracle", "[spectral][property]") {
  oracle::Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    auto m = oracle::random_01(rng, 1 + trial % 8, 0.3);
    auto p = matrix_profile(SquareMatrix::from_rows(m));
    CHECK(p.primitive == oracle::primitive_by_powers(m));
    if (p.primitive) CHECK(p.irreducible);
  }
}

TEST_CASE("Perron roots", "[spectral]") {
  for (std::size_t n = 1; n <= 7; ++n) {
    auto m = SquareMatrix(n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, (i + 3) % n) = 1;
    CHECK(perron(m) == 1.0);
  }
  CHECK(perron(SquareMatrix::from_rows({{1, 1}, {1, 1}})) == Approx(2.0).margin(1e-12));
  double phi = oracle::bisect([](double x) { return x * x - x - 1; }, 1, 2);
  CHECK(perron(SquareMatrix::from_rows({{1, 1}, {1, 0}})) == Approx(phi).margin(1e-10));
  CHECK(perron(SquareMatrix(4)) == 0.0);
  // Reducible: max over blocks.
  CHECK(perron(SquareMatrix::from_rows({{1, 1, 1}, {1, 0, 1}, {0, 0, 1}})) == Approx(phi).margin(1e-10));
}

TEST_CASE("Perron root is 1 exactly on permutations among irreducible 01 matrices", "[spectral][property]") {
  oracle::Rng rng(23);
  int irreducible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    auto m = SquareMatrix::from_rows(oracle::random_01(rng, 1 + trial % 6, 0.35));
    auto p = matrix_profile(m);
    if (!p.irreducible) continue;
    ++irreducible;
    double lam = perron(m);
    CHECK(lam >= 1.0 - 1e-12);
    if (p.permutation)
      CHECK(lam == 1.0);
    else
      CHECK(lam > 1.0 + 1e-6);
    if (p.structurally_zero_entropy) CHECK(lam == Approx(1.0).margin(1e-12));
  }
  CHECK(irreducible > 20);
}

TEST_CASE("rome verification", "[spectral]") {
  auto gold = SquareMatrix::from_rows({{1, 1}, {1, 0}});
  auto all = verify_rome(gold, {0, 1});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      auto terms = all.paths(i, j);
      if (gold(i, j)) {
        REQUIRE(terms.size() == 1);
        CHECK(terms[0].length == 1);
      } else {
        CHECK(terms.empty());
      }
    }

  auto one = verify_rome(gold, {0});
  auto loops = one.paths(0, 0);
  REQUIRE(loops.size() == 2);
  CHECK(loops[0].length == 1);
  CHECK(loops[1].length == 2);

  CHECK_THROWS_WITH(verify_rome(SquareMatrix::from_rows({{0, 1, 0}, {1, 0, 0}, {0, 0, 1}}), {2}),
                    ContainsSubstring("not a rome"));
}

TEST_CASE("star map rome: paths of length n, none from B to A", "[spectral]") {
  const int n = 3;
  auto f = star_map(n).map;
  auto data = verify_rome(f.transition().matrix, {n - 1, 2 * n - 1});  // I_n, O_n
  for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}) {
    auto terms = data.paths(i, j);
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].length == n);
  }
  CHECK(data.paths(1, 0).empty());
}

TEST_CASE("rome roots", "[spectral]") {
  auto r2 = rome_root(star_map(2).map.transition().matrix, {1, 3});
  CHECK(r2.charpoly == IntPoly{1, 0, -2, 0, 1});
  CHECK(r2.lambda == Approx(1.0).margin(1e-12));
  auto r4 = rome_root(star_map(4).map.transition().matrix, {3, 7});
  CHECK(r4.charpoly == IntPoly{1, 0, 0, 0, -2, 0, 0, 0, 1});

  auto gold = SquareMatrix::from_rows({{1, 1}, {1, 0}});
  auto rg = rome_root(gold, {0});
  CHECK(std::abs(rg.lambda - perron(gold)) < 1e-10);
  CHECK(rg.charpoly == reference_charpoly(gold.rows()));
  CHECK(rg.lambda == Approx(golden_ratio).margin(1e-10));
}

TEST_CASE("rome charpoly matches Berkowitz and is rome independent", "[spectral][property]") {
  oracle::Rng rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    auto rows = oracle::random_01(rng, 1 + trial % 9, 0.3);
    auto m = SquareMatrix::from_rows(rows);
    auto ref = reference_charpoly(rows);
    auto auto_rome = rome_root(m);
    CHECK(auto_rome.charpoly == ref);
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto full = rome_root(m, all);
    CHECK(full.charpoly == ref);
    CHECK(full.lambda == auto_rome.lambda);
    CHECK(std::abs(auto_rome.lambda - perron(m)) < 1e-8);
  }
}

TEST_CASE("largest root handles repeated roots", "[spectral]") {
  // (x - 3/2)^2 (x - 1) -> 3/2 exactly at the bisection resolution.
  IntPoly p{-9, 21, -16, 4};
  CHECK(largest_root_of_nonnegative_charpoly(p, Integer(4)) == Approx(1.5).margin(1e-11));
  CHECK(largest_root_of_nonnegative_charpoly(IntPoly{1, 0, -2, 0, 1}, Integer(3)) == Approx(1.0).margin(1e-11));
}

TEST_CASE("maximum cycle mean", "[spectral]") {
  CHECK(max_cycle_mean({{0}}, {1}) == 1);
  CHECK(max_cycle_mean({{1}, {0}}, {1, 0}) == Rational(1, 2));
  CHECK(max_cycle_mean({{1}, {2}, {}}, {1, 1, 1}) == 0);
  CHECK(max_cycle_mean({{1}, {0, 2}, {2}}, {1, 0, 0}) == Rational(1, 2));
}

TEST_CASE("maximum cycle mean against walks", "[spectral][property]") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + trial % 8;
    auto g = oracle::random_digraph(rng, n, 0.3);
    std::vector<long long> w(n);
    std::bernoulli_distribution bit(0.5);
    for (auto& x : w) x = bit(rng);
    double theta = to_double(max_cycle_mean(g, w));
    // Long walks can never beat theta by more than the transient part.
    double best = oracle::best_walk_fraction(g, w, 512);
    if (best < 0) {
      CHECK(theta == 0.0);
      continue;
    }
    CHECK(best >= theta - 1e-12);
    CHECK(best <= theta + static_cast<double>(n) / 512 + 1e-12);
  }
}
