#pragma once

#include <grexp/free_lie.hpp>
#include <grexp/rational.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace grexp {

inline constexpr int kMaxAerial = 4;

/// Admissible graph with n aerial vertices 0..n-1 and m terrestrial vertices
/// encoded as targets -1..-m. Aerial vertex v owns the ordered edges
/// (v, targets[v][0]) and (v, targets[v][1]); the global edge order is
/// vertex-major, then (a, b).
struct KGraph {
  int n = 0;
  int m = 2;
  std::vector<std::array<int, 2>> targets;

  static int terrestrial(int j) { return -1 - j; }
  static bool is_terrestrial(int t) { return t < 0; }
  static int terrestrial_index(int t) { return -1 - t; }

  bool operator==(const KGraph& o) const { return n == o.n && m == o.m && targets == o.targets; }
  bool operator<(const KGraph& o) const {
    return std::tie(n, m, targets) < std::tie(o.n, o.m, o.targets);
  }

  /// Stable text key, e.g. "n2m3:-1,1;-3,-2".
  std::string key() const {
    std::ostringstream os;
    os << "n" << n << "m" << m << ":";
    for (int v = 0; v < n; ++v) os << (v ? ";" : "") << targets[v][0] << "," << targets[v][1];
    return os.str();
  }
};

/// Violations of the admissibility rules (empty iff admissible).
inline std::vector<std::string> admissibility_errors(const KGraph& g) {
  std::vector<std::string> out;
  if (g.n < 0 || g.m < 1) out.push_back("bad vertex counts");
  if (static_cast<int>(g.targets.size()) != g.n) out.push_back("need exactly two edges per aerial vertex");
  for (int v = 0; v < static_cast<int>(g.targets.size()); ++v) {
    for (int t : g.targets[v]) {
      if (t == v) out.push_back("loop at vertex " + std::to_string(v));
      if (t >= g.n || t < -g.m) out.push_back("edge target out of range at vertex " + std::to_string(v));
    }
    if (g.targets[v][0] == g.targets[v][1]) out.push_back("multiple edge at vertex " + std::to_string(v));
  }
  return out;
}

inline bool is_admissible(const KGraph& g) { return admissibility_errors(g).empty(); }

/// All labeled admissible graphs in lexicographic order of target lists.
inline std::vector<KGraph> enumerate_admissible(int n, int m) {
  if (n < 0 || n > kMaxAerial) throw std::out_of_range("aerial vertex count must be in [0, 4]");
  if (m != 2 && m != 3) throw std::out_of_range("terrestrial count must be 2 or 3");
  std::vector<std::vector<std::array<int, 2>>> choices(n);
  for (int v = 0; v < n; ++v)
    for (int a = -m; a < n; ++a)
      for (int b = -m; b < n; ++b)
        if (a != v && b != v && a != b) choices[v].push_back({a, b});
  std::vector<KGraph> out;
  KGraph g{n, m, std::vector<std::array<int, 2>>(n)};
  std::function<void(int)> rec = [&](int v) {
    if (v == n) {
      out.push_back(g);
      return;
    }
    for (const auto& c : choices[v]) {
      g.targets[v] = c;
      rec(v + 1);
    }
  };
  rec(0);
  return out;
}

// ---------------------------------------------------------------------------
// Classification.

enum class GraphKind { LieSimple, WheelSimple, Product, Irrelevant };

inline std::string to_string(GraphKind k) {
  switch (k) {
    case GraphKind::LieSimple: return "lie";
    case GraphKind::WheelSimple: return "wheel";
    case GraphKind::Product: return "product";
    case GraphKind::Irrelevant: return "irrelevant";
  }
  return "?";
}

struct GraphClass {
  GraphKind kind = GraphKind::Product;
  std::vector<GraphKind> components;  // kinds of the simple factors (Product only)
};

inline std::vector<int> aerial_in_degrees(const KGraph& g) {
  std::vector<int> deg(g.n, 0);
  for (const auto& t : g.targets)
    for (int x : t)
      if (x >= 0) ++deg[x];
  return deg;
}

/// Connected components of the aerial subgraph, each as a sorted vertex list.
inline std::vector<std::vector<int>> aerial_components(const KGraph& g) {
  std::vector<int> parent(g.n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int v = 0; v < g.n; ++v)
    for (int t : g.targets[v])
      if (t >= 0) parent[find(v)] = find(t);
  std::map<int, std::vector<int>> groups;
  for (int v = 0; v < g.n; ++v) groups[find(v)].push_back(v);
  std::vector<std::vector<int>> out;
  for (auto& [r, vs] : groups) out.push_back(vs);
  std::sort(out.begin(), out.end());
  return out;
}

/// Induced subgraph on an aerial component, relabeled in increasing order.
inline KGraph induced(const KGraph& g, const std::vector<int>& vertices) {
  std::map<int, int> relabel;
  for (std::size_t i = 0; i < vertices.size(); ++i) relabel[vertices[i]] = static_cast<int>(i);
  KGraph s{static_cast<int>(vertices.size()), g.m, {}};
  for (int v : vertices) {
    std::array<int, 2> t = g.targets[v];
    for (int& x : t)
      if (x >= 0) x = relabel.at(x);
    s.targets.push_back(t);
  }
  return s;
}

inline GraphKind classify_component(const KGraph& c) {
  const auto deg = aerial_in_degrees(c);
  const int roots = static_cast<int>(std::count(deg.begin(), deg.end(), 0));
  return roots == 1 ? GraphKind::LieSimple : GraphKind::WheelSimple;
}

inline GraphClass classify(const KGraph& g) {
  if (!is_admissible(g)) throw std::invalid_argument("classify needs an admissible graph");
  const auto deg = aerial_in_degrees(g);
  if (std::any_of(deg.begin(), deg.end(), [](int d) { return d >= 2; })) return {GraphKind::Irrelevant, {}};
  const auto comps = aerial_components(g);
  if (comps.size() == 1) return {classify_component(induced(g, comps[0])), {}};
  GraphClass out{GraphKind::Product, {}};
  for (const auto& c : comps) out.components.push_back(classify_component(induced(g, c)));
  return out;
}

inline std::vector<KGraph> simple_components(const KGraph& g) {
  std::vector<KGraph> out;
  for (const auto& c : aerial_components(g)) out.push_back(induced(g, c));
  return out;
}

// ---------------------------------------------------------------------------
// Symmetries.

/// Reflection in the line x = 1/2 for three terrestrial points: 0 <-> 2.
inline KGraph mirror(const KGraph& g) {
  if (g.m != 3) throw std::invalid_argument("mirror needs m = 3");
  KGraph r = g;
  for (auto& t : r.targets)
    for (int& x : t)
      if (x < 0) x = -4 - x;  // -1 <-> -3, -2 fixed
  return r;
}

/// Graph with the two edges swapped at each vertex where swaps[v] is true.
inline KGraph swap_edges(const KGraph& g, const std::vector<bool>& swaps) {
  if (static_cast<int>(swaps.size()) != g.n) throw std::invalid_argument("one swap flag per aerial vertex");
  KGraph r = g;
  for (int v = 0; v < g.n; ++v)
    if (swaps[v]) std::swap(r.targets[v][0], r.targets[v][1]);
  return r;
}

/// Signature of a product of per-vertex edge transpositions.
inline int edge_permutation_sign(const KGraph& g, const std::vector<bool>& swaps) {
  if (static_cast<int>(swaps.size()) != g.n) throw std::invalid_argument("one swap flag per aerial vertex");
  return std::count(swaps.begin(), swaps.end(), true) % 2 ? -1 : 1;
}

/// Relabels aerial vertices: vertex v becomes perm[v].
inline KGraph relabel_vertices(const KGraph& g, const std::vector<int>& perm) {
  KGraph r{g.n, g.m, std::vector<std::array<int, 2>>(g.n)};
  for (int v = 0; v < g.n; ++v) {
    std::array<int, 2> t = g.targets[v];
    for (int& x : t)
      if (x >= 0) x = perm[x];
    r.targets[perm[v]] = t;
  }
  return r;
}

/// Canonical labeled representative of the geometric graph of g:
/// rep = (relabel + swaps) g with w_g = sign * w_rep. If some symmetry of the
/// geometric graph reverses the edge orientation, its weight vanishes.
struct CanonicalForm {
  KGraph rep;
  int sign = 1;
  bool odd_automorphism = false;
  int automorphisms = 0;  // number of (relabel, swaps) fixing rep
};

inline CanonicalForm canonical_form(const KGraph& g) {
  std::vector<int> perm(g.n);
  std::iota(perm.begin(), perm.end(), 0);
  CanonicalForm best{g, 1, false, 0};
  bool first = true;
  std::vector<std::pair<KGraph, int>> images;
  do {
    const KGraph relabeled = relabel_vertices(g, perm);
    for (unsigned mask = 0; mask < (1u << g.n); ++mask) {
      std::vector<bool> swaps(g.n);
      for (int v = 0; v < g.n; ++v) swaps[v] = (mask >> v) & 1u;
      const KGraph img = swap_edges(relabeled, swaps);
      const int sign = edge_permutation_sign(img, swaps);
      images.emplace_back(img, sign);
      if (first || img.targets < best.rep.targets) {
        best.rep = img;
        best.sign = sign;
        first = false;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (const auto& [img, sign] : images)
    if (img == best.rep) {
      ++best.automorphisms;
      if (sign != best.sign) best.odd_automorphism = true;
    }
  return best;
}

struct GeometricGraph {
  KGraph rep;
  long orbit_size = 0;  // labeled graphs with this geometric graph
  bool odd_automorphism = false;
};

/// Geometric graphs among enumerate_admissible(n, m) satisfying `keep`.
inline std::vector<GeometricGraph> geometric_graphs(int n, int m,
                                                    const std::function<bool(const KGraph&)>& keep) {
  std::map<std::vector<std::array<int, 2>>, GeometricGraph> found;
  for (const auto& g : enumerate_admissible(n, m)) {
    if (!keep(g)) continue;
    const auto cf = canonical_form(g);
    auto& entry = found[cf.rep.targets];
    entry.rep = cf.rep;
    entry.odd_automorphism = cf.odd_automorphism;
    ++entry.orbit_size;
  }
  std::vector<GeometricGraph> out;
  for (auto& [k, v] : found) out.push_back(v);
  return out;
}

inline bool is_lie_simple(const KGraph& g) { return classify(g).kind == GraphKind::LieSimple; }
inline bool is_wheel_simple(const KGraph& g) { return classify(g).kind == GraphKind::WheelSimple; }

// ---------------------------------------------------------------------------
// Symbols.

/// Bracket normalization of the Poisson tensor attached to aerial vertices.
enum class BracketMode {
  HalfBracket,       // alpha = (1/2)[ , ], factor 1/2 per vertex
  Geometric,         // full bracket, factor 1
  DoubledGeometric,  // full bracket of the doubled algebra, factor 2
};

inline Rational vertex_scale(BracketMode mode) {
  switch (mode) {
    case BracketMode::HalfBracket: return Rational(1, 2);
    case BracketMode::Geometric: return Rational(1);
    case BracketMode::DoubledGeometric: return Rational(2);
  }
  return Rational(1);
}

/// Generator and scale placed at each terrestrial point.
struct TerrestrialAssignment {
  std::vector<char> letters;
  std::vector<Rational> scales;

  static TerrestrialAssignment standard() { return {{'X', 'Y'}, {Rational(1), Rational(1)}}; }
  /// (X/2, Y, X/2) at (0, s, 1).
  static TerrestrialAssignment symmetric() { return {{'X', 'Y', 'X'}, {Rational(1, 2), Rational(1), Rational(1, 2)}}; }
  static TerrestrialAssignment for_m(int m) { return m == 2 ? standard() : symmetric(); }
};

struct LieSymbol {
  Rational coeff;
  LieWord word;
};

/// Cyclic product tr(ad w_1 ... ad w_k) with a prefactor.
struct TraceWord {
  Rational coeff;
  std::vector<LieWord> factors;

  /// Rotation with the lexicographically smallest sequence of bracket strings.
  TraceWord canonical() const {
    TraceWord best = *this;
    auto key = [](const TraceWord& t) {
      std::vector<std::string> k;
      for (const auto& f : t.factors) k.push_back(f.to_string());
      return k;
    };
    auto best_key = key(best);
    for (std::size_t r = 1; r < factors.size(); ++r) {
      TraceWord t = *this;
      std::rotate(t.factors.begin(), t.factors.begin() + r, t.factors.end());
      auto k = key(t);
      if (k < best_key) {
        best = t;
        best_key = k;
      }
    }
    return best;
  }

  /// Rewrites each factor as +-(standard bracketing of a Lyndon word) when its
  /// canonical form has a single term, folds the signs into coeff, then
  /// rotates canonically. A vanishing factor zeroes the word.
  TraceWord normalized() const {
    TraceWord t{coeff, {}};
    for (const auto& f : factors) {
      const auto c = grexp::canonicalize(f);
      if (c.is_zero_series()) return {Rational(0), {}};
      if (c.size() == 1) {
        const auto& [n, comp] = *c.terms().begin();
        t.coeff *= comp.begin()->second;
        t.factors.push_back(standard_bracketing(comp.begin()->first));
      } else {
        t.factors.push_back(f);
      }
    }
    return t.canonical();
  }

  std::string to_string() const {
    std::string s = grexp::to_string(coeff) + "*tr(";
    for (std::size_t i = 0; i < factors.size(); ++i) s += (i ? " ad" : "ad") + factors[i].to_string();
    return s + ")";
  }
};

namespace detail {

inline LieSymbol vertex_value(const KGraph& g, int t, BracketMode mode, const TerrestrialAssignment& ta) {
  if (t < 0) {
    const int j = KGraph::terrestrial_index(t);
    return {ta.scales.at(j), LieWord::leaf(ta.letters.at(j))};
  }
  const auto a = vertex_value(g, g.targets[t][0], mode, ta);
  const auto b = vertex_value(g, g.targets[t][1], mode, ta);
  return {vertex_scale(mode) * a.coeff * b.coeff, LieWord::bracket(a.word, b.word)};
}

inline void check_assignment(const KGraph& g, const TerrestrialAssignment& ta) {
  if (static_cast<int>(ta.letters.size()) != g.m || static_cast<int>(ta.scales.size()) != g.m)
    throw std::invalid_argument("terrestrial assignment must have one entry per terrestrial point");
}

}  // namespace detail

/// Bracket word of a Lie-type simple graph: each aerial vertex contributes
/// scale * [value(edge a), value(edge b)]; the root's value is the symbol.
inline LieSymbol symbol_lie(const KGraph& g, BracketMode mode, const TerrestrialAssignment& ta) {
  if (classify(g).kind != GraphKind::LieSimple) throw std::invalid_argument("symbol_lie needs a Lie-type simple graph");
  detail::check_assignment(g, ta);
  const auto deg = aerial_in_degrees(g);
  const int root = static_cast<int>(std::find(deg.begin(), deg.end(), 0) - deg.begin());
  return detail::vertex_value(g, root, mode, ta);
}

inline LieSymbol symbol_lie(const KGraph& g, BracketMode mode = BracketMode::HalfBracket) {
  return symbol_lie(g, mode, TerrestrialAssignment::for_m(g.m));
}

/// Trace word of a wheel-type simple graph. Around the cycle each vertex acts
/// as scale * ad(spoke value), with a minus sign when its cycle edge is edge a.
inline TraceWord symbol_wheel(const KGraph& g, BracketMode mode, const TerrestrialAssignment& ta) {
  if (classify(g).kind != GraphKind::WheelSimple) throw std::invalid_argument("symbol_wheel needs a wheel-type simple graph");
  detail::check_assignment(g, ta);
  // Every vertex has in-degree one, so walking backwards along in-edges from
  // vertex 0 ends up going around the cycle.
  std::vector<int> pred(g.n, -1);
  for (int u = 0; u < g.n; ++u)
    for (int t : g.targets[u])
      if (t >= 0) pred[t] = u;
  std::vector<int> order;
  std::vector<int> seen(g.n, -1);
  int v = 0;
  while (seen[v] < 0) {
    seen[v] = static_cast<int>(order.size());
    order.push_back(v);
    v = pred[v];
  }
  std::vector<int> cycle(order.begin() + seen[v], order.end());
  std::reverse(cycle.begin(), cycle.end());  // now cycle[i] -> cycle[i+1]
  TraceWord tw{Rational(1), {}};
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const int u = cycle[i];
    const int nxt = cycle[(i + 1) % cycle.size()];
    const int slot = g.targets[u][0] == nxt ? 0 : 1;
    const auto spoke = detail::vertex_value(g, g.targets[u][1 - slot], mode, ta);
    tw.coeff *= vertex_scale(mode) * spoke.coeff * (slot == 0 ? -1 : 1);
    tw.factors.push_back(spoke.word);
  }
  return tw.canonical();
}

inline TraceWord symbol_wheel(const KGraph& g, BracketMode mode = BracketMode::HalfBracket) {
  return symbol_wheel(g, mode, TerrestrialAssignment::for_m(g.m));
}

/// Symbol of a relevant graph: product of its simple components' symbols.
struct GraphSymbol {
  Rational coeff{1};
  std::vector<LieWord> lie_factors;
  std::vector<TraceWord> traces;  // coefficients folded into coeff
};

inline GraphSymbol symbol(const KGraph& g, BracketMode mode, const TerrestrialAssignment& ta) {
  if (classify(g).kind == GraphKind::Irrelevant) throw std::invalid_argument("irrelevant graph has zero symbol");
  GraphSymbol s;
  for (const auto& c : simple_components(g)) {
    if (classify_component(c) == GraphKind::LieSimple) {
      auto l = symbol_lie(c, mode, ta);
      s.coeff *= l.coeff;
      s.lie_factors.push_back(l.word);
    } else {
      auto t = symbol_wheel(c, mode, ta);
      s.coeff *= t.coeff;
      t.coeff = 1;
      s.traces.push_back(t);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Serialization: {"n", "m", "edges": [[src, tgt], ...]}.

inline nlohmann::json to_json(const KGraph& g) {
  auto edges = nlohmann::json::array();
  for (int v = 0; v < g.n; ++v)
    for (int s = 0; s < 2; ++s) edges.push_back({v, g.targets[v][s]});
  return {{"n", g.n}, {"m", g.m}, {"edges", edges}};
}

inline KGraph graph_from_json(const nlohmann::json& j) {
  KGraph g{j.at("n").get<int>(), j.at("m").get<int>(), {}};
  const auto& edges = j.at("edges");
  if (static_cast<int>(edges.size()) != 2 * g.n) throw std::invalid_argument("need exactly two edges per aerial vertex");
  g.targets.assign(g.n, {0, 0});
  std::vector<int> filled(g.n, 0);
  for (const auto& e : edges) {
    const int src = e.at(0).get<int>(), tgt = e.at(1).get<int>();
    if (src < 0 || src >= g.n) throw std::invalid_argument("edge source must be aerial");
    if (filled[src] >= 2) throw std::invalid_argument("more than two edges at a vertex");
    g.targets[src][filled[src]++] = tgt;
  }
  const auto errors = admissibility_errors(g);
  if (!errors.empty()) throw std::invalid_argument("inadmissible graph: " + errors.front());
  return g;
}

/// Inverse of KGraph::key(), e.g. "n2m2:-2,-1;-2,0".
inline KGraph graph_from_key(const std::string& key) {
  int n = 0, m = 0;
  char tail = 0;
  const auto colon = key.find(':');
  if (colon == std::string::npos || std::sscanf(key.substr(0, colon).c_str(), "n%dm%d%c", &n, &m, &tail) != 2)
    throw std::invalid_argument("malformed graph key: " + key);
  KGraph g{n, m, {}};
  std::istringstream is(key.substr(colon + 1));
  std::string vertex;
  while (std::getline(is, vertex, ';')) {
    int a = 0, b = 0;
    if (std::sscanf(vertex.c_str(), "%d,%d%c", &a, &b, &tail) != 2)
      throw std::invalid_argument("malformed graph key: " + key);
    g.targets.push_back({a, b});
  }
  const auto errors = admissibility_errors(g);
  if (!errors.empty()) throw std::invalid_argument("inadmissible graph: " + errors.front());
  return g;
}

}  // namespace grexp
