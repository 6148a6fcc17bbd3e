#include <grexp/algebra_io.hpp>
#include <grexp/catalog.hpp>
#include <grexp/lie_core.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace grexp;

namespace {

LieAlgebra sl2() {
  return LieAlgebra("sl2", 3, {{0, 1, 1, 2}, {0, 2, 2, -2}, {1, 2, 0, 1}});
}

RVector random_vector(std::mt19937_64& rng, int d) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 5);
  RVector v(d);
  for (auto& x : v) x = Rational(num(rng), den(rng));
  return v;
}

}  // namespace

TEST(LieCore, AbelianValidates) {
  LieAlgebra g("ab", 4, {});
  EXPECT_TRUE(validate(g).empty());
  std::mt19937_64 rng(1);
  EXPECT_TRUE(ad(g, random_vector(rng, 4)).is_zero_matrix());
}

TEST(LieCore, Sl2Validates) { EXPECT_TRUE(validate(sl2()).empty()); }

TEST(LieCore, CorruptedSl2ReportsJacobiTriple) {
  // [h, f] = +2f instead of -2f
  LieAlgebra g("bad", 3, {{0, 1, 1, 2}, {0, 2, 2, 2}, {1, 2, 0, 1}});
  const auto v = validate(g);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, "jacobi");
  EXPECT_EQ(v[0].indices, (std::vector<int>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(v[0].residual, 4.0);
}

TEST(LieCore, ScaledEfBracketStillSatisfiesJacobi) {
  // The only basis triple is (h, e, f), and its Jacobiator vanishes for any
  // multiple of h in [e, f]; this corruption is not detectable by Jacobi.
  LieAlgebra g("ef2h", 3, {{0, 1, 1, 2}, {0, 2, 2, -2}, {1, 2, 0, 2}});
  EXPECT_TRUE(validate(g).empty());
}

TEST(LieCore, RawTableAntisymmetryViolation) {
  std::vector<Rational> t(27);
  t[(0 * 3 + 1) * 3 + 2] = 1;  // [e0, e1] = e2 but [e1, e0] = 0
  const auto v = validate(LieAlgebra::from_raw_table("raw", 3, t));
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, "antisymmetry");
}

TEST(LieCore, AdOfH) {
  const auto g = sl2();
  const RMatrix a = ad(g, g.basis_vector(0));
  RMatrix expected(3, 3);
  expected(1, 1) = 2;
  expected(2, 2) = -2;
  EXPECT_EQ(a, expected);
}

TEST(LieCore, AdIsLinear) {
  std::mt19937_64 rng(7);
  const auto g = sl2();
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_vector(rng, 3), y = random_vector(rng, 3);
    EXPECT_EQ(ad(g, x + y), ad(g, x) + ad(g, y));
  }
  EXPECT_THROW(ad(g, RVector(2)), std::invalid_argument);
}

TEST(LieCore, Solvability) {
  EXPECT_TRUE(is_solvable(LieAlgebra("ab", 3, {})));
  EXPECT_TRUE(is_solvable(LieAlgebra("aff", 2, {{0, 1, 1, 1}})));
  EXPECT_FALSE(is_solvable(sl2()));
}

TEST(LieCore, Doubled) {
  const auto g = sl2();
  const auto g2 = doubled(g);
  EXPECT_TRUE(validate(g2).empty());
  EXPECT_EQ(g2.structure(0, 1, 1), Rational(4));
  const auto g4 = doubled(g2);
  for (std::size_t i = 0; i < g.table().size(); ++i) EXPECT_EQ(g4.table()[i], 4 * g.table()[i]);
  EXPECT_TRUE(validate(doubled(LieAlgebra("ab", 2, {}))).empty());
}

TEST(LieCore, CatalogEntriesValidate) {
  const auto& cat = catalog();
  ASSERT_GE(cat.size(), 6u);
  for (const auto& e : cat) {
    EXPECT_TRUE(validate(e.pair).empty()) << e.key();
    EXPECT_EQ(is_solvable(e.pair.algebra()), e.solvable) << e.key();
    if (auto s = e.structure()) EXPECT_TRUE(check_very_symmetric(*s).empty()) << e.key();
  }
}

TEST(LieCore, SolvableEntriesAreExactlyTheExpectedOnes) {
  std::vector<std::string> solvable;
  for (const auto& e : catalog())
    if (is_solvable(e.pair.algebra())) solvable.push_back(e.key());
  EXPECT_EQ(solvable, (std::vector<std::string>{"abelian", "heisenberg", "aff1xaff1"}));
}

TEST(LieCore, PAdjointSwapsBlocks) {
  std::mt19937_64 rng(11);
  for (const auto& e : catalog()) {
    const auto& pr = e.pair;
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = pr.embed_p(random_vector(rng, static_cast<int>(pr.p_indices().size())));
      const RMatrix a = ad(pr.algebra(), x);
      EXPECT_TRUE(a.block(pr.k_indices(), pr.k_indices()).is_zero_matrix()) << e.key();
      EXPECT_TRUE(a.block(pr.p_indices(), pr.p_indices()).is_zero_matrix()) << e.key();
      EXPECT_EQ(a.trace(), Rational(0));
    }
  }
}

TEST(LieCore, CartanControlIsNotVerySymmetric) {
  const auto& e = catalog_entry("sl2R-cartan");
  EXPECT_FALSE(check_very_symmetric({e.pair, RMatrix::identity(3)}).empty());
  // Structured search over theta with entries in {-1, 0, 1} swapping k and p.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    RMatrix theta(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) theta(r, c) = pick(rng);
    EXPECT_FALSE(check_very_symmetric({e.pair, theta}).empty());
  }
}

TEST(LieCore, VerySymmetricRejectsIdentityTheta) {
  const auto& e = catalog_entry("sl2xsl2");
  EXPECT_FALSE(check_very_symmetric({e.pair, RMatrix::identity(6)}).empty());
}

TEST(AlgebraIo, Fixtures) {
  const auto good = load_pair(std::string(GREXP_DATA_DIR) + "/good.json");
  EXPECT_TRUE(validate(good).empty());
  const auto bad = load_pair(std::string(GREXP_DATA_DIR) + "/bad-jacobi.json");
  const auto v = validate(bad);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, "jacobi");
  EXPECT_THROW(load_pair(std::string(GREXP_DATA_DIR) + "/malformed.json"), FormatError);
  EXPECT_THROW(load_pair("/nonexistent.json"), FormatError);
}

TEST(AlgebraIo, RoundTrip) {
  for (const auto& e : catalog()) {
    const auto back = pair_from_json(to_json(e.pair));
    EXPECT_EQ(back.algebra().table(), e.pair.algebra().table());
    EXPECT_EQ(back.k_indices(), e.pair.k_indices());
    EXPECT_TRUE(validate(back).empty());
  }
}
