#pragma once

#include <grexp/free_lie.hpp>
#include <grexp/kgraph.hpp>
#include <grexp/lie_core.hpp>
#include <grexp/weights.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace grexp {

inline constexpr int kMaxStarAerial = 3;

// ---------------------------------------------------------------------------
// Functions on g*: polynomial in xi_1..xi_d times exp(<x, xi>).

template <class T>
class PolyFunction {
 public:
  using Monomial = std::vector<int>;

  PolyFunction() = default;
  explicit PolyFunction(int dim) : dim_(dim), exponent_(dim, T(0)) {}

  static PolyFunction constant(int dim, const T& c) {
    PolyFunction f(dim);
    if (!is_zero(c)) f.terms_[Monomial(dim, 0)] = c;
    return f;
  }
  static PolyFunction coordinate(int dim, int i) {
    PolyFunction f(dim);
    Monomial m(dim, 0);
    m.at(i) = 1;
    f.terms_[m] = T(1);
    return f;
  }
  /// sum_i a_i xi_i
  static PolyFunction linear(const Vector<T>& a) {
    const int dim = static_cast<int>(a.size());
    PolyFunction f(dim);
    for (int i = 0; i < dim; ++i)
      if (!is_zero(a[i])) {
        Monomial m(dim, 0);
        m[i] = 1;
        f.terms_[m] = a[i];
      }
    return f;
  }
  /// exp(<x, xi>)
  static PolyFunction exponential(const Vector<T>& x) {
    PolyFunction f = constant(static_cast<int>(x.size()), T(1));
    f.exponent_ = x;
    return f;
  }

  int dim() const { return dim_; }
  const std::map<Monomial, T>& terms() const { return terms_; }
  const Vector<T>& exponent() const { return exponent_; }
  bool is_zero_function() const { return terms_.empty(); }

  T coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? T(0) : it->second;
  }

  int degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) {
      int s = 0;
      for (int e : m) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  /// Polynomial prefactor with the exponential dropped.
  PolyFunction prefactor() const {
    PolyFunction f = *this;
    f.exponent_.assign(dim_, T(0));
    return f;
  }

  PolyFunction derivative(int i) const {
    if (i < 0 || i >= dim_) throw std::out_of_range("derivative index out of range");
    PolyFunction r(dim_);
    r.exponent_ = exponent_;
    for (const auto& [m, c] : terms_) {
      if (m[i] > 0) {
        Monomial d = m;
        --d[i];
        r.add_term(d, c * T(m[i]));
      }
      if (!is_zero(exponent_[i])) r.add_term(m, c * exponent_[i]);
    }
    return r;
  }
  PolyFunction derivative(const std::vector<int>& idx) const {
    PolyFunction r = *this;
    for (int i : idx) r = r.derivative(i);
    return r;
  }

  PolyFunction& operator+=(const PolyFunction& o) {
    check_dim(o);
    if (o.is_zero_function()) return *this;
    if (is_zero_function()) exponent_ = o.exponent_;
    if (exponent_ != o.exponent_) throw std::invalid_argument("sum of functions with different exponentials");
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  PolyFunction& operator-=(const PolyFunction& o) { return *this += T(-1) * o; }
  friend PolyFunction operator+(PolyFunction a, const PolyFunction& b) { return a += b; }
  friend PolyFunction operator-(PolyFunction a, const PolyFunction& b) { return a -= b; }
  friend PolyFunction operator*(const T& s, const PolyFunction& a) {
    PolyFunction r(a.dim_);
    r.exponent_ = a.exponent_;
    if (is_zero(s)) return r;
    for (const auto& [m, c] : a.terms_) r.terms_[m] = s * c;
    return r;
  }
  friend PolyFunction operator*(const PolyFunction& a, const PolyFunction& b) {
    a.check_dim(b);
    PolyFunction r(a.dim_);
    for (int i = 0; i < a.dim_; ++i) r.exponent_[i] = a.exponent_[i] + b.exponent_[i];
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m(a.dim_);
        for (int i = 0; i < a.dim_; ++i) m[i] = ma[i] + mb[i];
        r.add_term(m, ca * cb);
      }
    return r;
  }
  bool operator==(const PolyFunction& o) const {
    if (dim_ != o.dim_ || terms_ != o.terms_) return false;
    return terms_.empty() || exponent_ == o.exponent_;
  }

  friend std::ostream& operator<<(std::ostream& os, const PolyFunction& f) { return os << f.to_string(); }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      if constexpr (std::is_same_v<T, Rational>)
        os << grexp::to_string(c);
      else
        os << c;
      for (int i = 0; i < dim_; ++i)
        if (m[i]) os << "*xi" << i << (m[i] > 1 ? "^" + std::to_string(m[i]) : "");
    }
    return os.str();
  }

 private:
  void add_term(const Monomial& m, const T& c) {
    if (is_zero(c)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, c);
      return;
    }
    it->second += c;
    if (is_zero(it->second)) terms_.erase(it);
  }
  void check_dim(const PolyFunction& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("functions on spaces of different dimension");
  }

  int dim_ = 0;
  std::map<Monomial, T> terms_;
  Vector<T> exponent_;
};

// ---------------------------------------------------------------------------
// Linear Poisson tensor alpha^{ij}(xi) = scale * sum_k c^k_ij xi_k.

template <class T>
class PoissonTensor {
 public:
  PoissonTensor(LieAlgebra g, const Rational& scale) : g_(std::move(g)), scale_(scale) {}

  int dim() const { return g_.dim(); }
  const LieAlgebra& algebra() const { return g_; }
  const Rational& scale() const { return scale_; }

  /// d alpha^{ij} / d xi_l
  T derivative(int i, int j, int l) const { return scalar_cast<T>(scale_ * g_.structure(i, j, l)); }

  PolyFunction<T> component(int i, int j) const {
    Vector<T> a(dim(), T(0));
    for (int k = 0; k < dim(); ++k) a[k] = derivative(i, j, k);
    return PolyFunction<T>::linear(a);
  }

  /// [alpha, alpha]_S on every basis triple, by direct expansion.
  bool schouten_vanishes() const {
    const int d = dim();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          PolyFunction<T> s(d);
          for (int l = 0; l < d; ++l) {
            s += derivative(j, k, l) * component(l, i);
            s += derivative(k, i, l) * component(l, j);
            s += derivative(i, j, l) * component(l, k);
          }
          if (!s.is_zero_function()) return false;
        }
    return true;
  }

 private:
  LieAlgebra g_;
  Rational scale_;
};

// ---------------------------------------------------------------------------
// Graph operators.

/// B_Gamma(f_1, ..., f_m): sum over edge labelings, alpha at each aerial
/// vertex, f_j at terrestrial vertex -j-1, each edge differentiating its target.
template <class T>
PolyFunction<T> apply_bgamma(const KGraph& g, const PoissonTensor<T>& alpha, const std::vector<PolyFunction<T>>& fs) {
  if (!is_admissible(g)) throw std::invalid_argument("B_Gamma of an inadmissible graph");
  if (g.n > kMaxStarAerial) throw std::out_of_range("graph operators are capped at n <= 3");
  if (static_cast<int>(fs.size()) != g.m) throw std::invalid_argument("one function per terrestrial vertex");
  const int d = alpha.dim();
  PolyFunction<T> zero(d);
  {
    PolyFunction<T> e = PolyFunction<T>::constant(d, T(1));
    for (const auto& f : fs) {
      if (f.dim() != d) throw std::invalid_argument("function dimension does not match the Poisson tensor");
      e = e * PolyFunction<T>::exponential(f.exponent());
    }
    zero = T(0) * e;
  }
  std::vector<std::vector<int>> into_aerial(g.n), into_terrestrial(g.m);
  for (int v = 0; v < g.n; ++v)
    for (int s = 0; s < 2; ++s) {
      const int t = g.targets[v][s];
      (t >= 0 ? into_aerial[t] : into_terrestrial[KGraph::terrestrial_index(t)]).push_back(2 * v + s);
    }
  for (const auto& in : into_aerial)
    if (in.size() >= 2) return zero;  // second derivative of a linear tensor

  const int E = 2 * g.n;
  std::vector<std::map<std::vector<int>, PolyFunction<T>>> memo(g.m);
  auto derived = [&](int j, std::vector<int> idx) -> const PolyFunction<T>& {
    std::sort(idx.begin(), idx.end());
    auto it = memo[j].find(idx);
    if (it != memo[j].end()) return it->second;
    return memo[j].emplace(idx, fs[j].derivative(idx)).first->second;
  };

  PolyFunction<T> result = zero;
  std::vector<int> label(E, 0);
  while (true) {
    T c(1);
    bool vanished = false;
    PolyFunction<T> prod = PolyFunction<T>::constant(d, T(1));
    for (int v = 0; v < g.n && !vanished; ++v) {
      const int a = label[2 * v], b = label[2 * v + 1];
      if (into_aerial[v].empty()) {
        const auto comp = alpha.component(a, b);
        if (comp.is_zero_function())
          vanished = true;
        else
          prod = prod * comp;
      } else {
        c *= alpha.derivative(a, b, label[into_aerial[v][0]]);
        if (is_zero(c)) vanished = true;
      }
    }
    if (!vanished) {
      for (int j = 0; j < g.m; ++j) {
        std::vector<int> idx;
        for (int e : into_terrestrial[j]) idx.push_back(label[e]);
        prod = prod * derived(j, idx);
      }
      result += c * prod;
    }
    int pos = 0;
    while (pos < E && ++label[pos] == d) label[pos++] = 0;
    if (pos == E) break;
  }
  return result;
}

template <class T>
PolyFunction<T> apply_bgamma(const KGraph& g, const PoissonTensor<T>& alpha, const PolyFunction<T>& f,
                             const PolyFunction<T>& h) {
  if (g.m != 2) throw std::invalid_argument("two-argument B_Gamma needs m = 2");
  return apply_bgamma(g, alpha, std::vector<PolyFunction<T>>{f, h});
}

template <class T>
PolyFunction<T> apply_bgamma_3(const KGraph& g, const PoissonTensor<T>& alpha, const PolyFunction<T>& f,
                               const PolyFunction<T>& h, const PolyFunction<T>& k) {
  if (g.m != 3) throw std::invalid_argument("three-argument B_Gamma needs m = 3");
  return apply_bgamma(g, alpha, std::vector<PolyFunction<T>>{f, h, k});
}

// ---------------------------------------------------------------------------
// Symbol polynomials: formal linear combinations of products of Lyndon
// brackets and normalized traces.

using SymbolPolynomial = std::map<std::string, Rational>;

namespace detail {

inline std::string monomial_key(std::vector<std::string> atoms) {
  std::sort(atoms.begin(), atoms.end());
  std::string k;
  for (std::size_t i = 0; i < atoms.size(); ++i) k += (i ? " * " : "") + atoms[i];
  return k.empty() ? "1" : k;
}

inline std::vector<std::pair<LieWord, Rational>> lyndon_terms(const LieWord& w) {
  std::vector<std::pair<LieWord, Rational>> out;
  const auto series = canonicalize(w);
  const auto terms = series.terms();
  for (const auto& [n, comp] : terms)
    for (const auto& [word, c] : comp) out.emplace_back(standard_bracketing(word), c);
  return out;
}

}  // namespace detail

/// Expands a graph symbol multilinearly over the Lyndon basis.
inline SymbolPolynomial expand_symbol(const GraphSymbol& s) {
  std::vector<std::pair<std::vector<std::string>, Rational>> cur{{{}, s.coeff}};
  for (const auto& f : s.lie_factors) {
    std::vector<std::pair<std::vector<std::string>, Rational>> next;
    for (const auto& [atoms, c] : cur)
      for (const auto& [w, k] : detail::lyndon_terms(f)) {
        auto a = atoms;
        a.push_back(w.to_string());
        next.emplace_back(std::move(a), c * k);
      }
    cur = std::move(next);
  }
  for (const auto& t : s.traces) {
    // multilinear in the factors
    std::vector<std::pair<TraceWord, Rational>> words{{TraceWord{Rational(1), {}}, t.coeff}};
    for (const auto& f : t.factors) {
      std::vector<std::pair<TraceWord, Rational>> next;
      for (const auto& [tw, c] : words)
        for (const auto& [w, k] : detail::lyndon_terms(f)) {
          TraceWord u = tw;
          u.factors.push_back(w);
          next.emplace_back(std::move(u), c * k);
        }
      words = std::move(next);
    }
    std::vector<std::pair<std::vector<std::string>, Rational>> next;
    for (const auto& [atoms, c] : cur)
      for (const auto& [tw, k] : words) {
        auto canon = tw.canonical();
        canon.coeff = 1;
        auto str = canon.to_string();
        auto a = atoms;
        a.push_back(str.substr(str.find('*') + 1));
        next.emplace_back(std::move(a), c * k);
      }
    cur = std::move(next);
  }
  SymbolPolynomial out;
  for (const auto& [atoms, c] : cur) {
    auto& slot = out[detail::monomial_key(atoms)];
    slot += c;
  }
  for (auto it = out.begin(); it != out.end();)
    it = is_zero(it->second) ? out.erase(it) : std::next(it);
  return out;
}

/// Labeled-to-geometric regrouping factor orbit / (n! 2^n); equals 1 unless
/// the graph has even symmetries.
inline Rational regroup_factor(const GeometricGraph& gg) {
  long denom = 1;
  for (int k = 2; k <= gg.rep.n; ++k) denom *= k;
  denom <<= gg.rep.n;
  return Rational(gg.orbit_size, denom);
}

inline bool is_relevant(const KGraph& g) { return classify(g).kind != GraphKind::Irrelevant; }

// ---------------------------------------------------------------------------
// Calibrated exact weights (m = 2, n <= 2).

/// Rational weights fixed by matching the graph expansion against the Dynkin
/// series (Lie graphs) and the degree-2 density log D = -(1/24) tr(adX adY)
/// (wheels); products are products of component weights.
class CalibratedWeights {
 public:
  static const CalibratedWeights& instance() {
    static const CalibratedWeights w;
    return w;
  }

  /// Weight of a canonical representative; nullopt if not calibrated.
  std::optional<Rational> geometric_weight(const KGraph& rep) const {
    auto it = table_.find(rep.key());
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }

  /// Weight of a labeled relevant graph. Irrelevant graphs are not needed
  /// for linear Poisson tensors and are reported as missing.
  Rational weight(const KGraph& g) const {
    if (g.m != 2 || g.n > 2) throw std::out_of_range("calibrated weights exist for m = 2, n <= 2");
    const auto cf = canonical_form(g);
    if (cf.odd_automorphism) return Rational(0);
    auto w = geometric_weight(cf.rep);
    if (!w) throw std::out_of_range("no calibrated weight for " + g.key());
    return cf.sign * *w;
  }

  const std::map<std::string, Rational>& table() const { return table_; }

 private:
  CalibratedWeights() {
    table_[KGraph{0, 2, {}}.key()] = 1;
    for (int n : {1, 2}) solve_lie(n);
    solve_wheels();
    for (const auto& gg : geometric_graphs(2, 2, [](const KGraph& g) {
           return classify(g).kind == GraphKind::Product;
         })) {
      if (gg.odd_automorphism) {
        table_[gg.rep.key()] = 0;
        continue;
      }
      Rational w(1);
      for (const auto& c : simple_components(gg.rep)) w *= weight(c);
      table_[gg.rep.key()] = w;
    }
  }

  void solve(const std::vector<GeometricGraph>& unknowns, const std::map<std::string, SymbolPolynomial>& columns,
             const SymbolPolynomial& target, const std::string& what) {
    std::vector<std::string> rows;
    for (const auto& [k, c] : target) rows.push_back(k);
    for (const auto& [key, col] : columns)
      for (const auto& [k, c] : col)
        if (std::find(rows.begin(), rows.end(), k) == rows.end()) rows.push_back(k);
    RMatrix a(rows.size(), unknowns.size());
    RVector b(rows.size(), Rational(0));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto it = target.find(rows[r]);
      if (it != target.end()) b[r] = it->second;
      for (std::size_t c = 0; c < unknowns.size(); ++c) {
        const auto& col = columns.at(unknowns[c].rep.key());
        auto jt = col.find(rows[r]);
        if (jt != col.end()) a(r, c) = jt->second;
      }
    }
    const auto x = solve_unique(a, b);
    if (!x) throw std::logic_error("calibration system for " + what + " is not uniquely solvable");
    for (std::size_t c = 0; c < unknowns.size(); ++c) table_[unknowns[c].rep.key()] = (*x)[c];
  }

  void solve_lie(int n) {
    std::vector<GeometricGraph> unknowns;
    std::map<std::string, SymbolPolynomial> columns;
    for (const auto& gg : geometric_graphs(n, 2, is_lie_simple)) {
      if (gg.odd_automorphism) {
        table_[gg.rep.key()] = 0;
        continue;
      }
      auto col = expand_symbol(symbol(gg.rep, BracketMode::Geometric, TerrestrialAssignment::standard()));
      for (auto& [k, c] : col) c *= regroup_factor(gg);
      columns[gg.rep.key()] = col;
      unknowns.push_back(gg);
    }
    SymbolPolynomial target;
    const auto component = bch_dynkin(n + 1).homogeneous(n + 1).terms().at(n + 1);
    for (const auto& [w, c] : component)
      target[standard_bracketing(w).to_string()] = c;
    solve(unknowns, columns, target, "Lie graphs with n = " + std::to_string(n));
  }

  void solve_wheels() {
    std::vector<GeometricGraph> unknowns;
    std::map<std::string, SymbolPolynomial> columns;
    for (const auto& gg : geometric_graphs(2, 2, is_wheel_simple)) {
      if (gg.odd_automorphism) {
        table_[gg.rep.key()] = 0;
        continue;
      }
      auto col = expand_symbol(symbol(gg.rep, BracketMode::Geometric, TerrestrialAssignment::standard()));
      for (auto& [k, c] : col) c *= regroup_factor(gg);
      columns[gg.rep.key()] = col;
      unknowns.push_back(gg);
    }
    solve(unknowns, columns, {{"tr(adX adY)", Rational(-1, 24)}}, "2-wheels");
  }

  std::map<std::string, Rational> table_;
};

// ---------------------------------------------------------------------------
// Monte-Carlo weight lookup.

/// Where the terrestrial points sit.
struct WeightSite {
  enum class Kind { TwoPoint, ThreePoint, Deformed } kind = Kind::TwoPoint;
  double param = 0.0;  // s or tau

  static WeightSite two_point() { return {}; }
  static WeightSite three_point(double s) { return {Kind::ThreePoint, s}; }
  static WeightSite deformed(double tau) { return {Kind::Deformed, tau}; }

  std::string label() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::TwoPoint: return "w";
      case Kind::ThreePoint: os << "w3@" << param; return os.str();
      case Kind::Deformed: os << "wdef@" << param; return os.str();
    }
    return "w";
  }
};

/// Estimate for a canonical representative. Each (graph, site) gets its own
/// stream derived from cfg.seed unless `shared_stream` is set, in which case
/// the seed depends on the graph only (common random numbers across sites).
inline WeightEstimate mc_weight(const KGraph& rep, const WeightSite& site, const SamplerConfig& cfg,
                                EstimateStore* store = nullptr, bool shared_stream = false) {
  SamplerConfig c = cfg;
  c.seed = derived_seed(cfg.seed, shared_stream ? rep.key() : rep.key() + "|" + site.label());
  auto compute = [&] {
    switch (site.kind) {
      case WeightSite::Kind::TwoPoint: return estimate_weight(rep, c);
      case WeightSite::Kind::ThreePoint: return estimate_weight_3pt(rep, site.param, c);
      case WeightSite::Kind::Deformed: return estimate_weight_deformed(rep, site.param, c);
    }
    throw std::logic_error("unknown weight site");
  };
  if (!store) return compute();
  nlohmann::json config = {{"site", site.label()}, {"sampler", sampler_json(c)}};
  auto e = store->get_or_compute(rep.key(), config, c.seed, compute);
  // cached entries carry no batch means, which correlated combinations need
  if (shared_stream && e.batch_means.empty() && rep.n > 0) e = compute();
  return e;
}

// ---------------------------------------------------------------------------
// Aggregated graph expansions.

/// Per-key combined estimates of sum_Gamma factor * w_Gamma * symbol_Gamma.
struct ExpansionEstimate {
  std::map<std::string, WeightEstimate> terms;

  double mean(const std::string& key) const {
    auto it = terms.find(key);
    return it == terms.end() ? 0.0 : it->second.mean;
  }
  double std_error(const std::string& key) const {
    auto it = terms.find(key);
    return it == terms.end() ? 0.0 : it->second.std_error;
  }
  std::vector<std::string> keys() const {
    std::vector<std::string> k;
    for (const auto& [key, e] : terms) k.push_back(key);
    return k;
  }
};

/// One contributing geometric graph with its expanded (regrouped) symbol.
struct GraphTerm {
  GeometricGraph graph;
  SymbolPolynomial symbol;
};

/// Geometric graphs with n aerial vertices, accepted by `keep`, with their
/// symbols (mode and assignment given) times the regrouping factor. Graphs
/// with odd symmetries are dropped.
inline std::vector<GraphTerm> graph_terms(int n, int m, const std::function<bool(const KGraph&)>& keep, BracketMode mode,
                                          const TerrestrialAssignment& ta) {
  std::vector<GraphTerm> out;
  for (const auto& gg : geometric_graphs(n, m, keep)) {
    if (gg.odd_automorphism) continue;
    auto sym = expand_symbol(symbol(gg.rep, mode, ta));
    for (auto& [k, c] : sym) c *= regroup_factor(gg);
    if (!sym.empty()) out.push_back({gg, std::move(sym)});
  }
  return out;
}

inline ExpansionEstimate aggregate(const std::vector<std::pair<WeightEstimate, SymbolPolynomial>>& contributions) {
  std::map<std::string, std::vector<std::pair<double, WeightEstimate>>> by_key;
  for (const auto& [e, sym] : contributions)
    for (const auto& [k, c] : sym) by_key[k].emplace_back(to_double(c), e);
  ExpansionEstimate out;
  for (auto& [k, terms] : by_key) out.terms[k] = combine(terms);
  return out;
}

inline WeightEstimate exact_estimate(double v) {
  WeightEstimate e;
  e.mean = v;
  return e;
}

/// Lie series X + Y + sum_{geometric Lie graphs, n <= N} w_Gamma Gamma(X, Y)
/// with calibrated weights (full bracket, one representative per graph).
inline LieSeries bch_from_graphs_calibrated(int N) {
  if (N < 0 || N > 2) throw std::out_of_range("calibrated weights reach order 2");
  LieSeries z = LieSeries::X(N + 1) + LieSeries::Y(N + 1);
  const auto& cal = CalibratedWeights::instance();
  for (int n = 1; n <= N; ++n)
    for (const auto& gg : geometric_graphs(n, 2, is_lie_simple)) {
      if (gg.odd_automorphism) continue;
      const auto s = symbol_lie(gg.rep, BracketMode::Geometric);
      z += (*cal.geometric_weight(gg.rep) * s.coeff * regroup_factor(gg)) * canonicalize(s.word, N + 1);
    }
  return z;
}

/// Same series as the labeled sum (1/n!) sum_Gamma w_Gamma a_Gamma with
/// half-bracket symbols, over every labeled Lie graph.
inline LieSeries bch_from_labeled_graphs_calibrated(int N) {
  if (N < 0 || N > 2) throw std::out_of_range("calibrated weights reach order 2");
  LieSeries z = LieSeries::X(N + 1) + LieSeries::Y(N + 1);
  const auto& cal = CalibratedWeights::instance();
  Rational fact(1);
  for (int n = 1; n <= N; ++n) {
    fact *= n;
    for (const auto& g : enumerate_admissible(n, 2)) {
      if (!is_lie_simple(g)) continue;
      const auto s = symbol_lie(g, BracketMode::HalfBracket);
      z += (cal.weight(g) * s.coeff / fact) * canonicalize(s.word, N + 1);
    }
  }
  return z;
}

/// Keys of a Lie series in the symbol-polynomial convention.
template <class T>
std::map<std::string, T> series_keys(const BasicLieSeries<T>& s) {
  std::map<std::string, T> out;
  const auto terms = s.terms();
  for (const auto& [n, comp] : terms)
    for (const auto& [w, c] : comp) out[standard_bracketing(w).to_string()] = c;
  return out;
}

/// Monte-Carlo BCH from graphs up to n = N aerial vertices (degree N + 1).
inline ExpansionEstimate bch_from_graphs_mc(int N, const SamplerConfig& cfg, EstimateStore* store = nullptr) {
  if (N < 0 || N > kMaxStarAerial) throw std::out_of_range("Monte-Carlo BCH reaches order 3");
  std::vector<std::pair<WeightEstimate, SymbolPolynomial>> contrib;
  contrib.emplace_back(exact_estimate(1.0), SymbolPolynomial{{"X", 1}, {"Y", 1}});
  for (int n = 1; n <= N; ++n)
    for (const auto& t : graph_terms(n, 2, is_lie_simple, BracketMode::Geometric, TerrestrialAssignment::standard()))
      contrib.emplace_back(mc_weight(t.graph.rep, WeightSite::two_point(), cfg, store), t.symbol);
  return aggregate(contrib);
}

/// Lie graphs with three terrestrial points carrying (X/2, Y, X/2), doubled
/// bracket scale, weights at the given site.
inline ExpansionEstimate zsym_expansion(int N, const WeightSite& site, const SamplerConfig& cfg,
                                        EstimateStore* store = nullptr, bool shared_stream = false) {
  if (N < 0 || N > kMaxStarAerial) throw std::out_of_range("Monte-Carlo Z_sym reaches order 3");
  std::vector<std::pair<WeightEstimate, SymbolPolynomial>> contrib;
  contrib.emplace_back(exact_estimate(1.0), SymbolPolynomial{{"X", 1}, {"Y", 1}});
  for (int n = 1; n <= N; ++n)
    for (const auto& t : graph_terms(n, 3, is_lie_simple, BracketMode::DoubledGeometric,
                                     TerrestrialAssignment::symmetric()))
      contrib.emplace_back(mc_weight(t.graph.rep, site, cfg, store, shared_stream), t.symbol);
  return aggregate(contrib);
}

/// Z_sym = X + Y + sum w_Gamma(1/2) Gamma(X, Y) over m = 3 Lie graphs.
inline ExpansionEstimate zsym_from_graphs(int N, const SamplerConfig& cfg, EstimateStore* store = nullptr) {
  return zsym_expansion(N, WeightSite::three_point(0.5), cfg, store);
}

/// Aggregated contributions of all relevant graphs with 1 <= n <= N to
/// exp(X/2) * exp(Y) * exp(X/2) exp(-X-Y), terrestrial points at (0, s, 1).
inline ExpansionEstimate triple_product_contributions(int N, double s, const SamplerConfig& cfg,
                                                      EstimateStore* store = nullptr) {
  if (N < 1 || N > 2) throw std::out_of_range("triple-product contributions are computed to order 2");
  std::vector<std::pair<WeightEstimate, SymbolPolynomial>> contrib;
  for (int n = 1; n <= N; ++n)
    for (const auto& t : graph_terms(n, 3, is_relevant, BracketMode::DoubledGeometric, TerrestrialAssignment::symmetric()))
      contrib.emplace_back(mc_weight(t.graph.rep, WeightSite::three_point(s), cfg, store), t.symbol);
  return aggregate(contrib);
}

// ---------------------------------------------------------------------------
// Star products.

/// Weights for labeled graphs: calibrated (exact) or Monte-Carlo means.
template <class T>
using WeightFn = std::function<T(const KGraph&)>;

inline WeightFn<Rational> calibrated_weight_fn() {
  return [](const KGraph& g) { return CalibratedWeights::instance().weight(g); };
}

inline WeightFn<double> mc_weight_fn(const SamplerConfig& cfg, EstimateStore* store = nullptr) {
  auto cache = std::make_shared<std::map<std::string, double>>();
  auto mu = std::make_shared<std::mutex>();
  return [cfg, store, cache, mu](const KGraph& g) {
    const auto cf = canonical_form(g);
    if (cf.odd_automorphism) return 0.0;
    {
      std::lock_guard<std::mutex> lock(*mu);
      auto it = cache->find(cf.rep.key());
      if (it != cache->end()) return cf.sign * it->second;
    }
    const double w = mc_weight(cf.rep, WeightSite::two_point(), cfg, store).mean;
    std::lock_guard<std::mutex> lock(*mu);
    (*cache)[cf.rep.key()] = w;
    return cf.sign * w;
  };
}

/// Coefficients of h^0..h^N in f * g = sum_n h^n/n! sum_Gamma w_Gamma B_Gamma(f, g).
template <class T>
std::vector<PolyFunction<T>> star(const PolyFunction<T>& f, const PolyFunction<T>& g, const PoissonTensor<T>& alpha,
                                  int N, const WeightFn<T>& weight) {
  if (N < 0 || N > kMaxStarAerial) throw std::out_of_range("star product order must be in [0, 3]");
  std::vector<PolyFunction<T>> out;
  out.push_back(f * g);
  T fact(1);
  for (int n = 1; n <= N; ++n) {
    fact *= T(n);
    PolyFunction<T> term = T(0) * (f * g);
    for (const auto& gr : enumerate_admissible(n, 2)) {
      if (!is_relevant(gr)) continue;
      const T w = weight(gr);
      if (is_zero(w)) continue;
      term += (w / fact) * apply_bgamma(gr, alpha, f, g);
    }
    out.push_back(term);
  }
  return out;
}

/// Truncated product of two h-series of functions.
template <class T>
std::vector<PolyFunction<T>> star_series(const std::vector<PolyFunction<T>>& a, const std::vector<PolyFunction<T>>& b,
                                         const PoissonTensor<T>& alpha, int N, const WeightFn<T>& weight) {
  std::vector<PolyFunction<T>> out(N + 1, PolyFunction<T>(alpha.dim()));
  for (std::size_t i = 0; i < a.size() && static_cast<int>(i) <= N; ++i)
    for (std::size_t j = 0; j < b.size() && static_cast<int>(i + j) <= N; ++j) {
      const auto p = star(a[i], b[j], alpha, N - static_cast<int>(i + j), weight);
      for (std::size_t k = 0; k < p.size(); ++k) out[i + j + k] += p[k];
    }
  return out;
}

}  // namespace grexp
