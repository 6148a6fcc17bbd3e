#include <grexp/algebra_io.hpp>
#include <grexp/catalog.hpp>
#include <grexp/star_engine.hpp>

#include <gtest/gtest.h>

#include <functional>
#include <random>

using namespace grexp;

namespace {

using RPoly = PolyFunction<Rational>;

LieAlgebra sl2() { return detail::sl2(); }

RVector random_vector(std::mt19937_64& rng, int d) {
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  RVector v(d);
  for (auto& x : v) x = Rational(num(rng), den(rng));
  return v;
}

// Bracket tree evaluated straight in the algebra.
RVector eval_word(const LieAlgebra& g, const LieWord& w, const std::vector<RVector>& leaves) {
  if (w.is_leaf()) return leaves.at(w.letter() == 'X' ? 0 : 1);
  return g.bracket(eval_word(g, w.left(), leaves), eval_word(g, w.right(), leaves));
}

Rational eval_trace(const LieAlgebra& g, const TraceWord& t, const std::vector<RVector>& leaves) {
  RMatrix p = RMatrix::identity(g.dim());
  for (const auto& f : t.factors) p = p * ad(g, eval_word(g, f, leaves));
  return t.coeff * p.trace();
}

// <xi, v> as a polynomial
RPoly pairing(const RVector& v) { return RPoly::linear(v); }

const KGraph wedge{1, 2, {{{-1, -2}}}};
const KGraph fig1{3, 2, {{{1, -2}, {-1, 2}, {-1, -2}}}};

SamplerConfig mc(std::size_t samples, std::uint64_t seed) {
  SamplerConfig c;
  c.samples = samples;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(PolyFunction, DerivativesOfExponentials) {
  const RVector x{1, Rational(1, 2), -2};
  const auto e = RPoly::exponential(x);
  EXPECT_EQ(e.derivative(1), Rational(1, 2) * e);
  const auto f = RPoly::coordinate(3, 0) * e;
  // d/dxi_0 (xi_0 e) = e + xi_0 e
  EXPECT_EQ(f.derivative(0), e + f);
  EXPECT_EQ(f.derivative({2, 2}), Rational(4) * f);
  EXPECT_THROW(e + RPoly::constant(3, 1), std::invalid_argument);
  EXPECT_EQ((RPoly::coordinate(3, 0) * RPoly::coordinate(3, 0)).degree(), 2);
}

TEST(PoissonTensor, SchoutenMatchesJacobi) {
  for (const auto& entry : catalog()) EXPECT_TRUE(PoissonTensor<Rational>(entry.pair.algebra(), Rational(1, 2)).schouten_vanishes());
  const auto bad = load_pair(std::string(GREXP_DATA_DIR) + "/bad-jacobi.json");
  EXPECT_FALSE(PoissonTensor<Rational>(bad.algebra(), 1).schouten_vanishes());
}

TEST(BGamma, EmptyGraphIsProduct) {
  const PoissonTensor<Rational> alpha(sl2(), Rational(1, 2));
  const auto f = RPoly::coordinate(3, 0), g = RPoly::coordinate(3, 2) + RPoly::constant(3, 5);
  EXPECT_EQ(apply_bgamma(KGraph{0, 2, {}}, alpha, f, g), f * g);
  EXPECT_EQ(apply_bgamma_3(KGraph{0, 3, {}}, alpha, f, g, f), f * g * f);
}

TEST(BGamma, WedgeOnLinearFunctions) {
  const auto g = sl2();
  const PoissonTensor<Rational> alpha(g, Rational(1, 2));
  std::mt19937_64 rng(1);
  const auto x = random_vector(rng, 3), y = random_vector(rng, 3);
  EXPECT_EQ(apply_bgamma(wedge, alpha, pairing(x), pairing(y)), Rational(1, 2) * pairing(g.bracket(x, y)));
}

TEST(BGamma, FigureOneOnExponentials) {
  const auto g = sl2();
  const PoissonTensor<Rational> alpha(g, Rational(1, 2));
  std::mt19937_64 rng(2);
  const auto x = random_vector(rng, 3), y = random_vector(rng, 3);
  const auto b = apply_bgamma(fig1, alpha, RPoly::exponential(x), RPoly::exponential(y));
  const auto w = LieWord::parse("[[X,[X,Y]],Y]");
  EXPECT_EQ(b.prefactor(), Rational(1, 8) * pairing(eval_word(g, w, {x, y})));
  EXPECT_EQ(b.exponent(), x + y);
}

TEST(BGamma, SymbolConsistencyUpToThreeVertices) {
  // every relevant m = 2 graph with n <= 3: the operator on exponentials
  // reproduces the symbol computed from the graph combinatorics
  const auto g = sl2();
  const PoissonTensor<Rational> alpha(g, Rational(1, 2));
  std::mt19937_64 rng(3);
  const auto x = random_vector(rng, 3), y = random_vector(rng, 3);
  const auto ex = RPoly::exponential(x), ey = RPoly::exponential(y);
  int checked = 0;
  for (int n = 1; n <= 3; ++n)
    for (const auto& gg : geometric_graphs(n, 2, is_relevant)) {
      const auto s = symbol(gg.rep, BracketMode::HalfBracket, TerrestrialAssignment::standard());
      RPoly expected = RPoly::constant(3, s.coeff);
      for (const auto& f : s.lie_factors) expected = expected * pairing(eval_word(g, f, {x, y}));
      for (const auto& t : s.traces) expected = eval_trace(g, t, {x, y}) * expected;
      EXPECT_EQ(apply_bgamma(gg.rep, alpha, ex, ey).prefactor(), expected) << gg.rep.key();
      ++checked;
    }
  EXPECT_GT(checked, 20);
}

TEST(BGamma, IrrelevantGraphsVanishOnLinearTensors) {
  const PoissonTensor<Rational> alpha(sl2(), 1);
  std::mt19937_64 rng(4);
  const auto ex = RPoly::exponential(random_vector(rng, 3)), ey = RPoly::exponential(random_vector(rng, 3));
  for (const auto& g : enumerate_admissible(2, 2))
    if (!is_relevant(g)) EXPECT_TRUE(apply_bgamma(g, alpha, ex, ey).is_zero_function()) << g.key();
}

TEST(BGamma, ThreePointSingleVertex) {
  const auto g = sl2();
  const PoissonTensor<Rational> alpha(g, Rational(1, 2));
  std::mt19937_64 rng(5);
  const auto a = random_vector(rng, 3), b = random_vector(rng, 3), c = random_vector(rng, 3);
  const auto fa = pairing(a), fb = pairing(b), fc = pairing(c);
  RPoly total(3);
  for (const auto& gr : enumerate_admissible(1, 3))
    if (gr.targets[0][0] < gr.targets[0][1]) total += apply_bgamma_3(gr, alpha, fa, fb, fc);
  // edges (-2,-1), (-3,-1), (-3,-2) in slot order: [b,a] c + [c,a] b + [c,b] a, halved
  const RPoly expected = Rational(1, 2) * (pairing(g.bracket(b, a)) * fc + pairing(g.bracket(c, a)) * fb +
                                           pairing(g.bracket(c, b)) * fa);
  EXPECT_EQ(total, expected);
}

TEST(BGamma, MirrorGraphsAgreeOnSymmetricData) {
  const auto g = sl2();
  const PoissonTensor<Rational> alpha(g, 1);
  std::mt19937_64 rng(6);
  const auto x = random_vector(rng, 3), y = random_vector(rng, 3);
  const auto ex = RPoly::exponential(scaled(x, Rational(1, 2))), ey = RPoly::exponential(y);
  for (const auto& gr : enumerate_admissible(2, 3))
    EXPECT_EQ(apply_bgamma_3(gr, alpha, ex, ey, ex), apply_bgamma_3(mirror(gr), alpha, ex, ey, ex)) << gr.key();
}

TEST(BGamma, ProductGraphSymbolIsProduct) {
  const auto g = sl2();
  const PoissonTensor<Rational> alpha(g, Rational(1, 2));
  std::mt19937_64 rng(7);
  const auto x = random_vector(rng, 3), y = random_vector(rng, 3);
  const auto ex = RPoly::exponential(x), ey = RPoly::exponential(y);
  const KGraph two{2, 2, {{{-1, -2}, {-2, -1}}}};
  ASSERT_EQ(classify(two).kind, GraphKind::Product);
  const auto w = apply_bgamma(wedge, alpha, ex, ey).prefactor();
  EXPECT_EQ(apply_bgamma(two, alpha, ex, ey).prefactor(), Rational(-1) * w * w);
}

TEST(Calibrated, Table) {
  const auto& cal = CalibratedWeights::instance();
  EXPECT_EQ(cal.weight(wedge), Rational(1, 2));
  EXPECT_EQ(cal.weight(swap_edges(wedge, {true})), Rational(-1, 2));
  EXPECT_EQ(cal.weight(KGraph{2, 2, {{{-2, -1}, {-2, 0}}}}), Rational(1, 12));
  EXPECT_EQ(cal.weight(KGraph{2, 2, {{{-2, -1}, {-1, 0}}}}), Rational(-1, 12));
  EXPECT_EQ(cal.weight(KGraph{2, 2, {{{-2, 1}, {-1, 0}}}}), Rational(-1, 24));
  EXPECT_EQ(cal.weight(KGraph{2, 2, {{{-1, 1}, {-1, 0}}}}), Rational(0));
  EXPECT_EQ(cal.weight(KGraph{2, 2, {{{-1, -2}, {-1, -2}}}}), Rational(1, 4));
  EXPECT_THROW(cal.weight(fig1), std::out_of_range);
}

TEST(Calibrated, BchFromGraphs) {
  EXPECT_EQ(bch_from_graphs_calibrated(2), bch_dynkin(3));
  EXPECT_EQ(bch_from_graphs_calibrated(1), bch_dynkin(2));
  // the geometric regrouping and the labeled sum agree term by term
  EXPECT_EQ(bch_from_labeled_graphs_calibrated(2), bch_from_graphs_calibrated(2));
}

TEST(Star, CommutatorOfLinearFunctions) {
  const auto g = sl2();
  const PoissonTensor<Rational> alpha(g, Rational(1, 2));
  std::mt19937_64 rng(8);
  const auto x = random_vector(rng, 3), y = random_vector(rng, 3);
  const auto xy = star(pairing(x), pairing(y), alpha, 2, calibrated_weight_fn());
  const auto yx = star(pairing(y), pairing(x), alpha, 2, calibrated_weight_fn());
  EXPECT_EQ(xy[0] - yx[0], RPoly(3));
  EXPECT_EQ(xy[1] - yx[1], pairing(g.bracket(x, y)));
  EXPECT_TRUE((xy[2] - yx[2]).is_zero_function());
}

TEST(Star, AbelianIsPointwise) {
  const PoissonTensor<Rational> alpha(catalog_entry("abelian").pair.algebra(), Rational(1, 2));
  const auto f = RPoly::coordinate(3, 0) * RPoly::coordinate(3, 1), g = RPoly::coordinate(3, 2);
  const auto p = star(f, g, alpha, 2, calibrated_weight_fn());
  EXPECT_EQ(p[0], f * g);
  EXPECT_TRUE(p[1].is_zero_function());
  EXPECT_TRUE(p[2].is_zero_function());
}

TEST(Star, AssociativeToSecondOrder) {
  const auto g = sl2();
  const PoissonTensor<Rational> alpha(g, Rational(1, 2));
  const auto w = calibrated_weight_fn();
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const auto a = pairing(random_vector(rng, 3)), b = pairing(random_vector(rng, 3)) * pairing(random_vector(rng, 3)),
               c = pairing(random_vector(rng, 3));
    const auto left = star_series(star(a, b, alpha, 2, w), {c}, alpha, 2, w);
    const auto right = star_series({a}, star(b, c, alpha, 2, w), alpha, 2, w);
    for (int k = 0; k <= 2; ++k) EXPECT_EQ(left[k], right[k]) << "order " << k;
  }
}

TEST(MonteCarlo, BchOrderTwo) {
  const auto est = bch_from_graphs_mc(2, mc(200'000, 101));
  const auto ref = series_keys(bch_dynkin(3));
  for (const auto& [k, c] : ref) {
    EXPECT_NEAR(est.mean(k), to_double(c), 3 * est.std_error(k) + 1e-12) << k;
    if (k.size() > 1) EXPECT_GT(est.std_error(k), 0.0) << k;
  }
  for (const auto& k : est.keys()) EXPECT_TRUE(ref.count(k)) << k;
}

TEST(MonteCarlo, ZsymOrderTwo) {
  const auto est = zsym_from_graphs(2, mc(100'000, 102));
  const auto ref = series_keys(zsym_reference(3));
  EXPECT_EQ(est.mean("X"), 1.0);
  EXPECT_EQ(est.mean("Y"), 1.0);
  EXPECT_NEAR(est.mean("[X,Y]"), 0.0, 3 * est.std_error("[X,Y]") + 1e-12);
  for (const std::string k : {"[X,[X,Y]]", "[[X,Y],Y]"})
    EXPECT_NEAR(est.mean(k), to_double(ref.at(k)), 3 * est.std_error(k)) << k;
}

TEST(MonteCarlo, WheelsMatchCalibratedDensity) {
  // aggregated two-wheel contribution against log D = -(1/24) tr(adX adY)
  std::vector<std::pair<WeightEstimate, SymbolPolynomial>> contrib;
  const auto cfg = mc(200'000, 103);
  for (const auto& t : graph_terms(2, 2, is_wheel_simple, BracketMode::Geometric, TerrestrialAssignment::standard()))
    contrib.emplace_back(mc_weight(t.graph.rep, WeightSite::two_point(), cfg), t.symbol);
  const auto est = aggregate(contrib);
  EXPECT_NEAR(est.mean("tr(adX adY)"), -1.0 / 24, 3 * est.std_error("tr(adX adY)"));
  EXPECT_NEAR(est.mean("tr(adX adX)"), 0.0, 3 * est.std_error("tr(adX adX)") + 1e-12);
  EXPECT_NEAR(est.mean("tr(adY adY)"), 0.0, 3 * est.std_error("tr(adY adY)") + 1e-12);
}

TEST(SymbolPolynomial, ExpandsProductsAndTraces) {
  GraphSymbol s;
  s.coeff = 2;
  s.lie_factors = {LieWord::parse("[Y,X]"), LieWord::parse("[X,Y]")};
  s.traces = {TraceWord{Rational(1), {LieWord::parse("Y"), LieWord::parse("[Y,X]")}}};
  const auto p = expand_symbol(s);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.begin()->first, "[X,Y] * [X,Y] * tr(adY ad[X,Y])");
  EXPECT_EQ(p.begin()->second, Rational(2));
}
