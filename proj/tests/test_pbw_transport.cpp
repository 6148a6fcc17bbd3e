#include <grexp/catalog.hpp>
#include <grexp/pbw_transport.hpp>
#include <grexp/symspace.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace grexp;

namespace {

const SymmetricPair& pair_of(const std::string& key) { return catalog_entry(key).pair; }

Exponents random_monomial(std::mt19937_64& rng, int dim, int max_degree) {
  std::uniform_int_distribution<int> var(0, dim - 1), deg(0, max_degree);
  Exponents m(dim, 0);
  for (int d = deg(rng); d > 0; --d) ++m[var(rng)];
  return m;
}

PBWElement as_element(const Exponents& m) {
  PBWElement e;
  e.add(m, 1);
  return e;
}

}  // namespace

TEST(PBW, AbelianIsPolynomialMultiplication) {
  const PBWAlgebra U(pair_of("abelian").algebra());
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_monomial(rng, 3, 3), b = random_monomial(rng, 3, 3);
    Exponents s(3);
    for (int j = 0; j < 3; ++j) s[j] = a[j] + b[j];
    EXPECT_EQ(U.multiply(as_element(a), as_element(b)), as_element(s));
  }
}

TEST(PBW, Sl2Commutator) {
  const PBWAlgebra U(detail::sl2());
  const auto h = U.generator(0), e = U.generator(1), f = U.generator(2);
  EXPECT_EQ(U.multiply(e, f) - U.multiply(f, e), h);
  EXPECT_EQ(U.multiply(h, e) - U.multiply(e, h), Rational(2) * e);
}

TEST(PBW, AssociativeAndFiltered) {
  for (const auto& entry : catalog()) {
    const auto U = PBWAlgebra::adapted(entry.pair);
    const int d = U.dim();
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
      const auto a = as_element(random_monomial(rng, d, 4)), b = as_element(random_monomial(rng, d, 4)),
                 c = as_element(random_monomial(rng, d, 4));
      const auto ab = U.multiply(a, b);
      EXPECT_EQ(U.multiply(ab, c), U.multiply(a, U.multiply(b, c))) << entry.key();
      EXPECT_LE(ab.degree(), a.degree() + b.degree());
    }
  }
}

TEST(PBW, SymmetrizeLowDegree) {
  const auto& p = pair_of("sl2xsl2");
  const auto U = PBWAlgebra::adapted(p);
  const int d = p.dim();
  EXPECT_EQ(U.symmetrize(SymPoly::constant(d, 3)), Rational(3) * U.unit());
  EXPECT_EQ(U.symmetrize(SymPoly::coordinate(d, 4)), U.generator(4));
  const auto x = U.generator(0), y = U.generator(4);
  EXPECT_EQ(U.symmetrize(SymPoly::coordinate(d, 0) * SymPoly::coordinate(d, 4)),
            Rational(1, 2) * (U.multiply(x, y) + U.multiply(y, x)));
  const PBWAlgebra A(pair_of("abelian").algebra());
  const auto q = SymPoly::coordinate(3, 1) * SymPoly::coordinate(3, 1) * SymPoly::coordinate(3, 2);
  EXPECT_EQ(A.symmetrize(q), as_element({0, 2, 1}));
}

TEST(PBW, ReductionModUk) {
  for (const auto& entry : catalog()) {
    const auto& p = entry.pair;
    const auto U = PBWAlgebra::adapted(p);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 30; ++i) {
      PBWElement a;
      for (int t = 0; t < 3; ++t) a.add(random_monomial(rng, p.dim(), 3), Rational(t + 1));
      const auto r = reduce_mod_Uk(a, p);
      EXPECT_EQ(reduce_mod_Uk(r, p), r);
      for (int k : p.k_indices()) EXPECT_TRUE(reduce_mod_Uk(U.multiply(a, U.generator(k)), p).is_zero()) << p.key();
    }
    for (int a : p.p_indices())
      for (int k : p.k_indices()) EXPECT_TRUE(reduce_mod_Uk(U.multiply(U.generator(a), U.generator(k)), p).is_zero());
  }
}

TEST(JHalf, LowDegreeUnchangedAndAbelianIdentity) {
  const auto& p = pair_of("sl2xsl2");
  const int d = p.dim();
  const auto lin = SymPoly::coordinate(d, 3) + Rational(2) * SymPoly::coordinate(d, 5) + SymPoly::constant(d, 7);
  EXPECT_EQ(j_half_partial(lin, p, 4), lin);
  const auto& ab = pair_of("abelian");
  const auto q = SymPoly::coordinate(3, 1) * SymPoly::coordinate(3, 1) * SymPoly::coordinate(3, 2);
  EXPECT_EQ(j_half_partial(q, ab, 4), q);
}

TEST(JHalf, QuadraticTermMatchesNumericHessian) {
  // second derivatives of J^{1/2} at 0 by central differences of J
  for (const std::string key : {"sl2xsl2", "sl2C/sl2R", "sl2R-cartan"}) {
    const auto& p = pair_of(key);
    const int d = p.dim();
    const auto series = j_power_series(p, 2);
    const double h = 1e-3;
    auto f = [&](const Vector<double>& x) { return std::sqrt(J_function(p, x)); };
    for (int a : p.p_indices())
      for (int b : p.p_indices()) {
        auto pt = [&](double sa, double sb) {
          Vector<double> x(d, 0.0);
          x[a] += sa * h;
          x[b] += sb * h;
          return f(x);
        };
        const double hess = (pt(1, 1) - pt(1, -1) - pt(-1, 1) + pt(-1, -1)) / (4 * h * h);
        Exponents m(d, 0);
        ++m[a];
        ++m[b];
        const double coeff = to_double(series.coefficient(m)) * (a == b ? 2.0 : 1.0);
        EXPECT_NEAR(coeff, hess, 1e-5) << key << " " << a << "," << b;
      }
  }
}

TEST(Invariants, KnownSpaces) {
  const auto ab = invariant_basis(pair_of("abelian"), 3);
  EXPECT_EQ(ab.size(), 1u + 2 + 3 + 4);
  const auto& sl = pair_of("sl2xsl2");
  const auto basis = invariant_basis(sl, 2);
  ASSERT_EQ(basis.size(), 2u);
  EXPECT_EQ(basis[1].degree(), 2);
  // the degree-2 invariant is a multiple of the Casimir: inverse Killing matrix on p
  const auto& g = sl.algebra();
  const auto& pi = sl.p_indices();
  RMatrix kil(pi.size(), pi.size());
  for (std::size_t a = 0; a < pi.size(); ++a)
    for (std::size_t b = 0; b < pi.size(); ++b)
      kil(a, b) = (ad(g, g.basis_vector(pi[a])) * ad(g, g.basis_vector(pi[b]))).trace();
  SymPoly casimir(sl.dim());
  for (std::size_t b = 0; b < pi.size(); ++b) {
    RVector rhs(pi.size(), Rational(0));
    rhs[b] = 1;
    const auto col = *solve_unique(kil, rhs);
    for (std::size_t a = 0; a < pi.size(); ++a)
      casimir += col[a] * SymPoly::coordinate(sl.dim(), pi[a]) * SymPoly::coordinate(sl.dim(), pi[b]);
  }
  const auto [m0, c0] = *basis[1].terms().begin();
  EXPECT_EQ((casimir.coefficient(m0) / c0) * basis[1], casimir);
  // Heisenberg: powers of the center coordinate
  const auto& hz = pair_of("heisenberg");
  const auto hb = invariant_basis(hz, 3);
  ASSERT_EQ(hb.size(), 4u);
  EXPECT_EQ(hb[1], SymPoly::coordinate(3, 2));
  for (const auto& u : invariant_basis(pair_of("sl2C/sl2R"), 4)) EXPECT_TRUE(is_k_invariant(pair_of("sl2C/sl2R"), u));
}

TEST(Transport, RouviereMapLowDegree) {
  const auto& p = pair_of("sl2xsl2");
  const auto U = PBWAlgebra::adapted(p);
  EXPECT_EQ(rouviere_map(SymPoly::constant(p.dim(), 1), p, U, 4), U.unit());
  const auto& hz = pair_of("heisenberg");
  const auto Uh = PBWAlgebra::adapted(hz);
  EXPECT_EQ(rouviere_map(SymPoly::coordinate(3, 2), hz, Uh, 4), Uh.generator(2));
  EXPECT_THROW(rouviere_map(SymPoly::coordinate(3, 1), hz, Uh, 4), std::invalid_argument);
}

TEST(Transport, HomomorphismOnQualifyingPairs) {
  for (const auto& e : catalog()) {
    if (!(e.solvable || e.very_symmetric())) continue;
    const auto r = check_homomorphism(e.pair, 4);
    EXPECT_TRUE(r.exact()) << to_json(r).dump(1);
  }
  const auto casimir = check_homomorphism(pair_of("sl2xsl2"), 4);
  EXPECT_EQ(casimir.invariant_dims, (std::vector<int>{1, 0, 1, 0, 1}));
  EXPECT_FALSE(casimir.entries.empty());
}

TEST(Transport, ConventionMatters) {
  // the Casimir square detects a wrong power of J
  EXPECT_FALSE(check_homomorphism(pair_of("sl2xsl2"), 4, Rational(-1, 2)).exact());
  EXPECT_FALSE(check_homomorphism(pair_of("sl2xsl2"), 4, Rational(0)).exact());
}

TEST(Transport, IndependentOfPOrder) {
  const auto& p = pair_of("sl2xsl2");
  auto perm = p.p_indices();
  std::reverse(perm.begin(), perm.end());
  const auto U1 = PBWAlgebra::adapted(p), U2 = PBWAlgebra::adapted(p, perm);
  const auto basis = invariant_basis(p, 2);
  const auto& c = basis[1];
  const auto g1 = reduce_mod_Uk(U1.multiply(rouviere_map(c, p, U1, 4), rouviere_map(c, p, U1, 4)), p);
  const auto g2 = reduce_mod_Uk(U2.multiply(rouviere_map(c, p, U2, 4), rouviere_map(c, p, U2, 4)), p);
  EXPECT_EQ(reduce_mod_Uk(U2.reexpress(g1, U1), p), g2);
  EXPECT_TRUE(check_homomorphism(p, 4, Rational(1, 2), perm).exact());
}
