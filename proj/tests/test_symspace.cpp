#include <grexp/catalog.hpp>
#include <grexp/symspace.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace grexp;

namespace {

const SymmetricPair& pair_of(const std::string& key) { return catalog_entry(key).pair; }

bool lemma_applies(const CatalogEntry& e) { return e.solvable || e.very_symmetric(); }

double max_diff(const Vector<double>& a, const Vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(ZsymOracle, Degenerations) {
  const auto& p = pair_of("sl2xsl2");
  std::mt19937_64 rng(1);
  const auto x = random_p(p, rng, 0.08);
  const Vector<double> zero(p.dim(), 0.0);
  EXPECT_LT(max_diff(zsym_matrix_oracle(p, x, zero), x), 1e-13);
  EXPECT_LT(max_diff(zsym_matrix_oracle(p, zero, x), x), 1e-13);
}

TEST(ZsymOracle, MatchesSeriesAndStaysInP) {
  for (const auto& e : catalog()) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
      const auto x = random_p(e.pair, rng, 0.05), y = random_p(e.pair, rng, 0.05);
      const auto z = zsym_matrix_oracle(e.pair, x, y);
      EXPECT_LT(max_diff(z, zsym_series_value(e.pair, x, y, 8)), 1e-8) << e.key();
      EXPECT_LT(norm2(e.pair.project_k(z)), 1e-10) << e.key();
    }
  }
  std::mt19937_64 rng(3);
  const auto& p = pair_of("sl2xsl2");
  EXPECT_THROW(zsym_matrix_oracle(p, random_p(p, rng, 0.5), random_p(p, rng, 0.01)), std::out_of_range);
}

TEST(Jacobians, ClosedForms) {
  const auto g = detail::sl2();
  const Vector<double> zero(3, 0.0);
  EXPECT_DOUBLE_EQ(j_function(g, zero), 1.0);
  for (double t : {0.1, 0.7, 1.5}) {
    // ad(t h) has eigenvalues 0, 2t, -2t: j = sinh(t)^2 / t^2
    const Vector<double> x{t, 0, 0};
    const double closed = std::pow(std::sinh(t) / t, 2);
    EXPECT_NEAR(j_function(g, x), closed, 1e-12);
    EXPECT_NEAR(j_function_eigen(g, x), closed, 1e-12);
  }
  std::mt19937_64 rng(4);
  for (const auto& e : catalog()) {
    EXPECT_DOUBLE_EQ(J_function(e.pair, Vector<double>(e.pair.dim(), 0.0)), 1.0);
    for (int i = 0; i < 10; ++i) {
      const auto x = random_p(e.pair, rng, 0.9);
      EXPECT_NEAR(J_function(e.pair, x), J_function_eigen(e.pair, x), 1e-12) << e.key();
      EXPECT_NEAR(j_function(e.pair.algebra(), x), j_function_eigen(e.pair.algebra(), x), 1e-12) << e.key();
    }
  }
  const auto& ab = pair_of("abelian");
  EXPECT_DOUBLE_EQ(J_function(ab, random_p(ab, rng, 3.0)), 1.0);
  EXPECT_DOUBLE_EQ(j_function(ab.algebra(), random_p(ab, rng, 3.0)), 1.0);
  EXPECT_THROW(J_function(ab, Vector<double>{1, 0, 0}), std::invalid_argument);
}

TEST(Jacobians, DoubledIsJSquared) {
  std::mt19937_64 rng(5);
  for (const auto& e : catalog())
    for (int i = 0; i < 100; ++i) {
      const auto x = random_p(e.pair, rng, 0.6);
      const double J = J_function(e.pair, x);
      EXPECT_NEAR(j_doubled(e.pair, x), J * J, 1e-10) << e.key();
    }
}

TEST(Density, TwoFormsAgree) {
  std::mt19937_64 rng(6);
  for (const auto& e : catalog()) {
    const Vector<double> zero(e.pair.dim(), 0.0);
    const auto r0 = dsym(e.pair, zero, zero);
    EXPECT_NEAR(r0.form_J, 1.0, 1e-15);
    EXPECT_NEAR(r0.form_doubled, 1.0, 1e-15);
    for (int i = 0; i < 100; ++i) {
      const auto r = dsym(e.pair, random_p(e.pair, rng, 0.08), random_p(e.pair, rng, 0.08));
      EXPECT_LE(r.residual, 1e-8) << e.key();
      EXPECT_LE(r.z_k_projection, 1e-10) << e.key();
      EXPECT_EQ(r.oracle, "matrix");
      if (e.key() == "abelian") EXPECT_NEAR(r.dsym(), 1.0, 1e-15);
    }
  }
  // outside the oracle radius the series takes over
  const auto& p = pair_of("sl2xsl2");
  const auto r = dsym(p, random_p(p, rng, 0.2), random_p(p, rng, 0.2));
  EXPECT_EQ(r.oracle, "series");
  EXPECT_EQ(r.truncation_order, 8);
  EXPECT_LE(r.residual, 1e-8);
}

TEST(Density, InfinityEndpoint) {
  std::mt19937_64 rng(7);
  const auto& p = pair_of("sl2xsl2");
  const Vector<double> zero(p.dim(), 0.0);
  EXPECT_NEAR(implied_e_half(p, zero, random_p(p, rng, 0.08)), 1.0, 1e-10);
  const auto& ab = pair_of("abelian");
  EXPECT_NEAR(implied_e_half(ab, random_p(ab, rng, 0.08), random_p(ab, rng, 0.08)), 1.0, 1e-15);
  const auto rep = dsym_infinity_identity(p, random_p(p, rng, 0.1), random_p(p, rng, 0.1));
  EXPECT_GE(rep.fitted_exponent, 1.9);
  for (std::size_t i = 1; i < rep.deviations.size(); ++i) EXPECT_LT(rep.deviations[i], rep.deviations[i - 1]);
}

TEST(Density, IrisEndpoint) {
  std::mt19937_64 rng(8);
  const auto& p = pair_of("heisenberg");
  const auto x = random_p(p, rng, 1.0), y = random_p(p, rng, 1.0);
  const auto [z, d] = iris_endpoint(p, x, y);
  EXPECT_EQ(z, x + y);
  EXPECT_EQ(d, 1.0);
}

TEST(TraceIdentities, BlockIdentitiesHoldEverywhere) {
  const auto words = even_bracket_words(4);
  ASSERT_EQ(words.size(), 4u);  // [X,Y] and three words of degree 4
  for (const auto& e : catalog()) {
    std::mt19937_64 rng(9);
    for (int s = 0; s < 100; ++s) {
      const auto x = random_rational_p(e.pair, rng), y = random_rational_p(e.pair, rng);
      for (const auto& f : words) {
        const auto r = trace_identities(e.pair, f, x, y);
        EXPECT_EQ(r.cyclic_residual, Rational(0)) << e.key();
        EXPECT_EQ(r.full_trace_residual, Rational(0)) << e.key();
        if (e.very_symmetric()) EXPECT_EQ(r.k_p_swap_residual, Rational(0)) << e.key();
        if (e.key() == "abelian") EXPECT_EQ(r.tr_g_D_ady, Rational(0));
      }
    }
  }
}

TEST(TraceIdentities, RejectsNonKValuedF) {
  const auto& p = pair_of("sl2xsl2");
  std::mt19937_64 rng(10);
  const auto x = random_rational_p(p, rng), y = random_rational_p(p, rng);
  EXPECT_THROW(trace_identities(p, LieSeries::X(3), x, y), std::invalid_argument);
  EXPECT_THROW(trace_identities(p, even_bracket_words(2)[0], p.algebra().basis_vector(0), y), std::invalid_argument);
}

TEST(RouviereLemma, VanishesOnQualifyingPairs) {
  const auto words = even_bracket_words(4);
  for (const auto& e : catalog())
    if (lemma_applies(e)) EXPECT_EQ(rouviere_lemma_check(e.pair, words, 50), Rational(0)) << e.key();
  // informational: the Cartan pair of sl(2, R) is neither solvable nor very symmetric
  const auto w = rouviere_lemma_check(pair_of("sl2R-cartan"), words, 20);
  RecordProperty("sl2R_cartan_max_trace", to_string(w));
}

TEST(Deformation, FieldIsEvenAndKValued) {
  SamplerConfig cfg;
  cfg.samples = 20'000;
  const auto d = deformation_series(3, {0.3, 0.6}, cfg);
  ASSERT_EQ(d.f.size(), 2u);
  for (const auto& f : d.f)
    for (const auto& k : f.keys()) EXPECT_EQ(detail::key_degree(k) % 2, 0) << k;
  EXPECT_THROW(deformation_series(3, {0.6, 0.3}, cfg), std::invalid_argument);
}

TEST(Deformation, OdeResidualAndSign) {
  OdeConfig cfg;
  cfg.sampler.samples = 50'000;
  cfg.sampler.seed = 11;
  EXPECT_EQ(calibrate_field_sign(cfg), 1);
  const auto r = kv_ode_residual_at(0.5, 1, cfg);
  EXPECT_TRUE(r.pass()) << to_json(r).dump(1);
  for (const auto& c : r.coefficients)
    if (c.degree == 1) {
      EXPECT_EQ(c.lhs, 0.0);
      EXPECT_EQ(c.residual, 0.0);
    }
  // the wrong sign is caught on [[X,Y],Y]
  const auto wrong = kv_ode_residual_at(0.5, -1, cfg);
  EXPECT_FALSE(wrong.pass());
  EXPECT_THROW(kv_ode_residual_at(0.05, 1, cfg), std::invalid_argument);
}

TEST(Deformation, SmallTauMatchesThreePointExpansion) {
  SamplerConfig cfg;
  cfg.samples = 50'000;
  cfg.seed = 12;
  for (const auto& c : zsym_endpoint(3, 1e-3, cfg)) EXPECT_TRUE(c.pass) << c.key << " " << c.sigma;
}
