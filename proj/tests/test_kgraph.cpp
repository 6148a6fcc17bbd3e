#include <grexp/kgraph.hpp>

#include <gtest/gtest.h>

#include <set>

using namespace grexp;

namespace {

// Written from the admissibility rules alone: every map from the 2n edge slots
// to all vertices, then filtered.
std::set<std::vector<std::array<int, 2>>> brute_force(int n, int m) {
  std::set<std::vector<std::array<int, 2>>> out;
  const int vertices = n + m;
  long total = 1;
  for (int i = 0; i < 2 * n; ++i) total *= vertices;
  for (long code = 0; code < total; ++code) {
    long c = code;
    std::vector<std::array<int, 2>> t(n);
    bool ok = true;
    for (int v = 0; v < n; ++v)
      for (int s = 0; s < 2; ++s) {
        const int x = static_cast<int>(c % vertices) - m;  // -m..n-1
        c /= vertices;
        t[v][s] = x;
        if (x == v) ok = false;
      }
    for (int v = 0; v < n && ok; ++v)
      if (t[v][0] == t[v][1]) ok = false;
    if (ok) out.insert(t);
  }
  return out;
}

KGraph fig1() { return {3, 2, {{1, -2}, {-1, 2}, {-1, -2}}}; }
KGraph fig3() { return {5, 2, {{4, 1}, {-1, 2}, {-2, 3}, {-2, 0}, {-1, -2}}}; }
KGraph wedge() { return {1, 2, {{-1, -2}}}; }

std::vector<bool> mask_to_swaps(unsigned mask, int n) {
  std::vector<bool> s(n);
  for (int v = 0; v < n; ++v) s[v] = (mask >> v) & 1u;
  return s;
}

}  // namespace

TEST(KGraph, SmallCounts) {
  EXPECT_EQ(enumerate_admissible(0, 2).size(), 1u);
  const auto one = enumerate_admissible(1, 2);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0].targets[0], (std::array<int, 2>{-2, -1}));
  EXPECT_EQ(enumerate_admissible(1, 3).size(), 6u);
  EXPECT_THROW(enumerate_admissible(5, 2), std::out_of_range);
  EXPECT_THROW(enumerate_admissible(1, 4), std::out_of_range);
}

TEST(KGraph, CountsMatchBruteForce) {
  for (int m : {2, 3})
    for (int n = 0; n <= 3; ++n) {
      const auto list = enumerate_admissible(n, m);
      std::set<std::vector<std::array<int, 2>>> got;
      for (const auto& g : list) {
        EXPECT_TRUE(is_admissible(g));
        got.insert(g.targets);
      }
      EXPECT_EQ(got.size(), list.size()) << "duplicates at n=" << n << " m=" << m;
      EXPECT_EQ(got, brute_force(n, m)) << "n=" << n << " m=" << m;
    }
}

TEST(KGraph, EnumerationIsDeterministicAndSorted) {
  const auto a = enumerate_admissible(2, 3), b = enumerate_admissible(2, 3);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
}

TEST(KGraph, Classify) {
  EXPECT_EQ(classify(fig1()).kind, GraphKind::LieSimple);
  EXPECT_EQ(classify(fig3()).kind, GraphKind::WheelSimple);
  EXPECT_EQ(classify(wedge()).kind, GraphKind::LieSimple);
  const KGraph two_wedges{2, 2, {{-1, -2}, {-2, -1}}};
  const auto c = classify(two_wedges);
  EXPECT_EQ(c.kind, GraphKind::Product);
  EXPECT_EQ(c.components, (std::vector<GraphKind>{GraphKind::LieSimple, GraphKind::LieSimple}));
  const KGraph doubly_hit{3, 2, {{2, -1}, {2, -2}, {-1, -2}}};
  EXPECT_EQ(classify(doubly_hit).kind, GraphKind::Irrelevant);
  EXPECT_THROW(classify(KGraph{1, 2, {{0, -1}}}), std::invalid_argument);
}

TEST(KGraph, MirrorIsAnInvolutionPreservingClass) {
  for (int n = 0; n <= 3; ++n)
    for (const auto& g : enumerate_admissible(n, 3)) {
      const auto h = mirror(g);
      EXPECT_TRUE(is_admissible(h));
      EXPECT_EQ(mirror(h), g);
      EXPECT_EQ(classify(h).kind, classify(g).kind);
    }
  const KGraph g{1, 3, {{-1, -2}}};
  EXPECT_EQ(mirror(g).targets[0], (std::array<int, 2>{-3, -2}));
  EXPECT_THROW(mirror(wedge()), std::invalid_argument);
}

TEST(KGraph, SymbolLieFigureOne) {
  const auto half = symbol_lie(fig1(), BracketMode::HalfBracket);
  EXPECT_EQ(half.coeff, Rational(1, 8));
  EXPECT_EQ(half.word.to_string(), "[[X,[X,Y]],Y]");
  const auto geo = symbol_lie(fig1(), BracketMode::Geometric);
  EXPECT_EQ(geo.coeff, Rational(1));
  const auto w = symbol_lie(wedge());
  EXPECT_EQ(w.coeff, Rational(1, 2));
  EXPECT_EQ(w.word.to_string(), "[X,Y]");
  EXPECT_THROW(symbol_lie(fig3()), std::invalid_argument);
}

TEST(KGraph, SymbolLieSymmetricAssignment) {
  const KGraph g{1, 3, {{-1, -2}}};
  const auto s = symbol_lie(g, BracketMode::DoubledGeometric);
  EXPECT_EQ(s.coeff, Rational(1));  // 2 * (1/2) * 1
  EXPECT_EQ(s.word.to_string(), "[X,Y]");
}

TEST(KGraph, SymbolWheelFigureThree) {
  const auto t = symbol_wheel(fig3(), BracketMode::HalfBracket);
  EXPECT_EQ(t.coeff, Rational(1, 32));
  ASSERT_EQ(t.factors.size(), 4u);
  // cyclic rotation of ad[X,Y] adX adY adY
  EXPECT_EQ(t.to_string(), "1/32*tr(adX adY adY ad[X,Y])");
}

TEST(KGraph, TwoWheelFromX) {
  const KGraph g{2, 2, {{-1, 1}, {-1, 0}}};
  const auto t = symbol_wheel(g);
  EXPECT_EQ(t.to_string(), "1/4*tr(adX adX)");
}

TEST(KGraph, WheelSymbolIndependentOfVertexLabels) {
  const auto base = symbol_wheel(fig3());
  std::vector<int> perm{0, 1, 2, 3, 4};
  int checked = 0;
  while (std::next_permutation(perm.begin(), perm.end()) && checked < 40) {
    const auto t = symbol_wheel(relabel_vertices(fig3(), perm));
    EXPECT_EQ(t.to_string(), base.to_string());
    ++checked;
  }
}

TEST(KGraph, EdgePermutationSign) {
  const auto g = fig1();
  EXPECT_EQ(edge_permutation_sign(g, {false, false, false}), 1);
  EXPECT_EQ(edge_permutation_sign(g, {true, false, false}), -1);
  EXPECT_EQ(edge_permutation_sign(g, {true, false, true}), 1);
}

TEST(KGraph, SymbolsFlipSignUnderEdgeSwaps) {
  for (int n = 1; n <= 3; ++n)
    for (const auto& g : enumerate_admissible(n, 2)) {
      const auto cls = classify(g).kind;
      if (cls != GraphKind::LieSimple && cls != GraphKind::WheelSimple) continue;
      for (unsigned mask = 1; mask < (1u << n); ++mask) {
        const auto swaps = mask_to_swaps(mask, n);
        const auto h = swap_edges(g, swaps);
        const int eps = edge_permutation_sign(g, swaps);
        if (cls == GraphKind::LieSimple) {
          const auto a = symbol_lie(g), b = symbol_lie(h);
          EXPECT_EQ(a.coeff * canonicalize(a.word), Rational(eps) * b.coeff * canonicalize(b.word)) << g.key();
        } else {
          const auto a = symbol_wheel(g).normalized(), b = symbol_wheel(h).normalized();
          EXPECT_EQ(a.coeff, Rational(eps) * b.coeff) << g.key();
          EXPECT_EQ(a.to_string().substr(a.to_string().find('*')), b.to_string().substr(b.to_string().find('*')));
        }
      }
    }
}

TEST(KGraph, SymbolDegreeCountsTerrestrialEndpoints) {
  for (int m : {2, 3})
    for (int n = 1; n <= 3; ++n)
      for (const auto& g : enumerate_admissible(n, m)) {
        if (classify(g).kind != GraphKind::LieSimple) continue;
        int endpoints = 0;
        for (const auto& t : g.targets)
          for (int x : t) endpoints += x < 0;
        EXPECT_EQ(symbol_lie(g).word.degree(), endpoints);
        EXPECT_EQ(endpoints, n + 1);
      }
}

TEST(KGraph, ContributingLieGraphsHaveNoSymmetries) {
  for (int n = 1; n <= 3; ++n) {
    long fact = 1;
    for (int k = 2; k <= n; ++k) fact *= k;
    for (const auto& geo : geometric_graphs(n, 2, is_lie_simple)) {
      const auto sym = symbol_lie(geo.rep);
      if (canonicalize(sym.word).is_zero_series()) {
        // e.g. [[X,Y],[X,Y]]: the symmetry is odd and the graph drops out
        EXPECT_TRUE(geo.odd_automorphism) << geo.rep.key();
        continue;
      }
      EXPECT_EQ(geo.orbit_size, fact << n) << geo.rep.key();
      EXPECT_FALSE(geo.odd_automorphism);
    }
  }
}

TEST(KGraph, CanonicalFormSign) {
  const auto g = wedge();
  const auto h = swap_edges(g, {true});
  const auto cg = canonical_form(g), ch = canonical_form(h);
  EXPECT_EQ(cg.rep, ch.rep);
  EXPECT_EQ(cg.sign * ch.sign, -1);
  // two identical 2-wheels swapped into each other carry an odd symmetry:
  // the wheel 0 -> 1 -> 0 with both spokes to the same point
  const KGraph w{2, 2, {{-1, 1}, {-1, 0}}};
  EXPECT_FALSE(canonical_form(w).odd_automorphism);
}

TEST(KGraph, JsonRoundTrip) {
  for (const auto& g : enumerate_admissible(2, 3)) EXPECT_EQ(graph_from_json(to_json(g)), g);
  EXPECT_THROW(graph_from_json(nlohmann::json{{"n", 1}, {"m", 2}, {"edges", {{0, -1}, {0, -1}}}}),
               std::invalid_argument);
}

TEST(KGraph, KeyRoundTrip) {
  for (int n = 0; n <= 2; ++n)
    for (const auto& g : enumerate_admissible(n, 3)) EXPECT_EQ(graph_from_key(g.key()).key(), g.key());
  EXPECT_THROW(graph_from_key("n1m2:-1,-1"), std::invalid_argument);
  EXPECT_THROW(graph_from_key("n1m2-1,-2"), std::invalid_argument);
  EXPECT_THROW(graph_from_key("n1m2:-1,x"), std::invalid_argument);
}
