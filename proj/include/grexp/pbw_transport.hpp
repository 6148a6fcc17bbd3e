#pragma once

#include <grexp/lie_core.hpp>
#include <grexp/matrix.hpp>
#include <grexp/star_engine.hpp>

#include <json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace grexp {

/// Commutative polynomials in the basis vectors of g (elements of S(g)).
using SymPoly = PolyFunction<Rational>;
using Exponents = std::vector<int>;

inline int total_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

inline SymPoly monomial(int dim, const Exponents& m) {
  SymPoly r = SymPoly::constant(dim, 1);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < m.at(i); ++k) r = r * SymPoly::coordinate(dim, i);
  return r;
}

inline SymPoly homogeneous_part(const SymPoly& p, int d) {
  SymPoly r(p.dim());
  for (const auto& [m, c] : p.terms())
    if (total_degree(m) == d) r += c * monomial(p.dim(), m);
  return r;
}

inline SymPoly truncated(const SymPoly& p, int max_degree) {
  SymPoly r(p.dim());
  for (const auto& [m, c] : p.terms())
    if (total_degree(m) <= max_degree) r += c * monomial(p.dim(), m);
  return r;
}

/// Element of U(g) in the PBW basis attached to a generator order: the
/// monomial with exponents m is prod_t e_{order[t]}^{m[order[t]]}.
struct PBWElement {
  std::map<Exponents, Rational> terms;

  bool is_zero() const { return terms.empty(); }
  void add(const Exponents& m, const Rational& c) {
    if (grexp::is_zero(c)) return;
    auto [it, fresh] = terms.emplace(m, c);
    if (fresh) return;
    it->second += c;
    if (grexp::is_zero(it->second)) terms.erase(it);
  }
  PBWElement& operator+=(const PBWElement& o) {
    for (const auto& [m, c] : o.terms) add(m, c);
    return *this;
  }
  PBWElement& operator-=(const PBWElement& o) {
    for (const auto& [m, c] : o.terms) add(m, -c);
    return *this;
  }
  friend PBWElement operator+(PBWElement a, const PBWElement& b) { return a += b; }
  friend PBWElement operator-(PBWElement a, const PBWElement& b) { return a -= b; }
  friend PBWElement operator*(const Rational& s, const PBWElement& a) {
    PBWElement r;
    if (grexp::is_zero(s)) return r;
    for (const auto& [m, c] : a.terms) r.terms.emplace(m, s * c);
    return r;
  }
  bool operator==(const PBWElement& o) const { return terms == o.terms; }

  int degree() const {
    int d = -1;
    for (const auto& [m, c] : terms) d = std::max(d, total_degree(m));
    return d;
  }
  Rational max_abs_coefficient() const {
    Rational r(0);
    for (const auto& [m, c] : terms) r = std::max(r, Rational(abs(c)));
    return r;
  }
};

/// Straightening in U(g) for a fixed generator order.
class PBWAlgebra {
 public:
  explicit PBWAlgebra(LieAlgebra g, std::vector<int> order = {}) : g_(std::move(g)), order_(std::move(order)) {
    if (order_.empty()) {
      order_.resize(g_.dim());
      std::iota(order_.begin(), order_.end(), 0);
    }
    std::vector<int> sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < g_.dim(); ++i)
      if (static_cast<int>(sorted.size()) != g_.dim() || sorted[i] != i)
        throw std::invalid_argument("PBW order must be a permutation of the basis");
    rank_.resize(g_.dim());
    for (int t = 0; t < g_.dim(); ++t) rank_[order_[t]] = t;
  }

  /// p-generators first, k-generators last.
  static PBWAlgebra adapted(const SymmetricPair& pair, std::vector<int> p_order = {}) {
    if (p_order.empty()) p_order = pair.p_indices();
    auto sorted = p_order, p = pair.p_indices();
    std::sort(sorted.begin(), sorted.end());
    if (sorted != p) throw std::invalid_argument("p_order must permute the p indices");
    for (int i : pair.k_indices()) p_order.push_back(i);
    return PBWAlgebra(pair.algebra(), p_order);
  }

  const LieAlgebra& algebra() const { return g_; }
  const std::vector<int>& order() const { return order_; }
  int dim() const { return g_.dim(); }

  PBWElement unit() const {
    PBWElement r;
    r.add(Exponents(dim(), 0), 1);
    return r;
  }
  PBWElement generator(int i) const { return straighten({i}); }

  /// Ordered product of the generators in `word`, straightened.
  PBWElement straighten(const std::vector<int>& word) const {
    auto it = memo_.find(word);
    if (it != memo_.end()) return it->second;
    PBWElement r;
    std::size_t i = 0;
    while (i + 1 < word.size() && rank_[word[i]] <= rank_[word[i + 1]]) ++i;
    if (i + 1 >= word.size()) {
      Exponents m(dim(), 0);
      for (int w : word) ++m[w];
      r.add(m, 1);
    } else {
      // u a b v = u b a v + u [a, b] v
      auto swapped = word;
      std::swap(swapped[i], swapped[i + 1]);
      r += straighten(swapped);
      for (const auto& [k, c] : g_.basis_bracket(word[i], word[i + 1])) {
        std::vector<int> shorter(word.begin(), word.begin() + i);
        shorter.push_back(k);
        shorter.insert(shorter.end(), word.begin() + i + 2, word.end());
        r += c * straighten(shorter);
      }
    }
    memo_.emplace(word, r);
    return r;
  }

  std::vector<int> word(const Exponents& m) const {
    std::vector<int> w;
    for (int t : order_)
      for (int r = 0; r < m[t]; ++r) w.push_back(t);
    return w;
  }

  PBWElement multiply(const PBWElement& a, const PBWElement& b) const {
    PBWElement r;
    for (const auto& [ma, ca] : a.terms)
      for (const auto& [mb, cb] : b.terms) {
        auto w = word(ma);
        const auto wb = word(mb);
        w.insert(w.end(), wb.begin(), wb.end());
        r += (ca * cb) * straighten(w);
      }
    return r;
  }

  /// Same element of U(g) written in this algebra's PBW basis.
  PBWElement reexpress(const PBWElement& a, const PBWAlgebra& from) const {
    PBWElement r;
    for (const auto& [m, c] : a.terms) r += c * straighten(from.word(m));
    return r;
  }

  /// x^alpha -> average of the products over all orderings of its factors.
  PBWElement symmetrize(const SymPoly& p) const {
    if (p.dim() != dim()) throw std::invalid_argument("polynomial and algebra dimensions differ");
    PBWElement r;
    for (const auto& [m, c] : p.terms()) {
      std::vector<int> w;
      for (int i = 0; i < dim(); ++i)
        for (int k = 0; k < m[i]; ++k) w.push_back(i);
      PBWElement sum;
      long count = 0;
      do {
        sum += straighten(w);
        ++count;
      } while (std::next_permutation(w.begin(), w.end()));
      r += (c / Rational(count)) * sum;
    }
    return r;
  }

 private:
  LieAlgebra g_;
  std::vector<int> order_;
  std::vector<int> rank_;
  mutable std::map<std::vector<int>, PBWElement> memo_;
};

/// Drops monomials with a k-factor; with k last these span U(g) k.
inline PBWElement reduce_mod_Uk(const PBWElement& a, const SymmetricPair& pair) {
  PBWElement r;
  for (const auto& [m, c] : a.terms) {
    bool in_k = false;
    for (int i : pair.k_indices()) in_k = in_k || m[i] > 0;
    if (!in_k) r.add(m, c);
  }
  return r;
}

// ---------------------------------------------------------------------------
// J^{1/2} as a constant-coefficient operator on S(p).

namespace detail {

/// Taylor coefficients of log(sinh u / u) in u^2: 1/6, -1/180, 1/2835, -1/37800.
inline Rational log_sinhc_coefficient(int k) {
  static const Rational c[] = {Rational(1, 6), Rational(-1, 180), Rational(1, 2835), Rational(-1, 37800)};
  if (k < 1 || k > 4) throw std::out_of_range("log(sinh u / u) is tabulated to u^8");
  return c[k - 1];
}

inline SymPoly truncated_product(const SymPoly& a, const SymPoly& b, int max_degree) {
  SymPoly r(a.dim());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      Exponents m(a.dim());
      for (int i = 0; i < a.dim(); ++i) m[i] = ma[i] + mb[i];
      if (total_degree(m) <= max_degree) r += (ca * cb) * monomial(a.dim(), m);
    }
  return r;
}

}  // namespace detail

inline constexpr int kMaxTransportDegree = 8;

/// J(x)^power on p as a polynomial in the p-coordinates, truncated at degree D.
inline SymPoly j_power_series(const SymmetricPair& pair, int D, const Rational& power = Rational(1, 2)) {
  if (D < 0 || D > kMaxTransportDegree) throw std::out_of_range("J series degree must be in [0, 8]");
  const int d = pair.dim();
  const auto& g = pair.algebra();
  // ad x with x = sum_a x_a e_a over p
  std::vector<std::vector<SymPoly>> adx(d, std::vector<SymPoly>(d, SymPoly(d)));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a : pair.p_indices())
        if (!is_zero(g.structure(a, j, i))) adx[i][j] += g.structure(a, j, i) * SymPoly::coordinate(d, a);
  auto mul = [&](const std::vector<std::vector<SymPoly>>& A, const std::vector<std::vector<SymPoly>>& B) {
    std::vector<std::vector<SymPoly>> C(d, std::vector<SymPoly>(d, SymPoly(d)));
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        if (A[i][k].is_zero_function()) continue;
        for (int j = 0; j < d; ++j) C[i][j] += detail::truncated_product(A[i][k], B[k][j], D);
      }
    return C;
  };
  SymPoly log_j(d);
  auto ad2 = mul(adx, adx);
  auto pw = ad2;
  for (int k = 1; 2 * k <= D; ++k) {
    SymPoly tr(d);
    for (int i : pair.p_indices()) tr += pw[i][i];
    log_j += detail::log_sinhc_coefficient(k) * tr;
    if (2 * (k + 1) <= D) pw = mul(pw, ad2);
  }
  // exp(power * log J), truncated
  const SymPoly l = power * log_j;
  SymPoly out = SymPoly::constant(d, 1), term = SymPoly::constant(d, 1);
  for (int n = 1; 2 * n <= D; ++n) {
    term = Rational(1, n) * detail::truncated_product(term, l, D);
    out += term;
  }
  return out;
}

/// q(d) u for q = J^power: each x_a becomes d/d e_a.
inline SymPoly j_half_partial(const SymPoly& u, const SymmetricPair& pair, int D,
                              const Rational& power = Rational(1, 2)) {
  if (u.dim() != pair.dim()) throw std::invalid_argument("polynomial and pair dimensions differ");
  const auto q = j_power_series(pair, D, power);
  SymPoly r(u.dim());
  for (const auto& [m, c] : q.terms()) {
    std::vector<int> idx;
    for (int i = 0; i < u.dim(); ++i)
      for (int k = 0; k < m[i]; ++k) idx.push_back(i);
    r += c * u.derivative(idx);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Invariants and the transport map.

/// Homogeneous monomials of degree d in the variables `vars`.
inline std::vector<Exponents> monomials_of_degree(int dim, const std::vector<int>& vars, int d) {
  std::vector<Exponents> out;
  Exponents m(dim, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == vars.size() || vars.empty()) {
      if (vars.empty()) {
        if (left == 0) out.push_back(m);
        return;
      }
      m[vars[i]] = left;
      out.push_back(m);
      m[vars[i]] = 0;
      return;
    }
    for (int e = left; e >= 0; --e) {
      m[vars[i]] = e;
      rec(i + 1, left - e);
    }
    m[vars[i]] = 0;
  };
  rec(0, d);
  return out;
}

/// Derivation of S(g) extending ad(e_k).
inline SymPoly adjoint_action(const LieAlgebra& g, int k, const SymPoly& u) {
  SymPoly r(u.dim());
  for (int a = 0; a < g.dim(); ++a) {
    const auto du = u.derivative(a);
    if (du.is_zero_function()) continue;
    SymPoly image(u.dim());
    for (const auto& [b, c] : g.basis_bracket(k, a)) image += c * SymPoly::coordinate(u.dim(), b);
    r += image * du;
  }
  return r;
}

inline bool is_k_invariant(const SymmetricPair& pair, const SymPoly& u) {
  for (int k : pair.k_indices())
    if (!adjoint_action(pair.algebra(), k, u).is_zero_function()) return false;
  return true;
}

/// Homogeneous basis of S(p)^k up to degree D, lowest degree first.
inline std::vector<SymPoly> invariant_basis(const SymmetricPair& pair, int D) {
  if (D < 0 || D > 6) throw std::out_of_range("invariant basis degree must be in [0, 6]");
  const int dim = pair.dim();
  std::vector<SymPoly> out;
  for (int d = 0; d <= D; ++d) {
    const auto mons = monomials_of_degree(dim, pair.p_indices(), d);
    std::map<Exponents, std::size_t> row_of;
    std::vector<std::vector<SymPoly>> images(pair.k_indices().size());
    for (std::size_t kk = 0; kk < pair.k_indices().size(); ++kk)
      for (const auto& m : mons) {
        images[kk].push_back(adjoint_action(pair.algebra(), pair.k_indices()[kk], monomial(dim, m)));
        for (const auto& [e, c] : images[kk].back().terms()) row_of.emplace(e, 0);
      }
    std::size_t r = 0;
    for (auto& [e, idx] : row_of) idx = r++;
    RMatrix a(pair.k_indices().size() * row_of.size(), mons.size());
    for (std::size_t kk = 0; kk < images.size(); ++kk)
      for (std::size_t j = 0; j < mons.size(); ++j)
        for (const auto& [e, c] : images[kk][j].terms()) a(kk * row_of.size() + row_of.at(e), j) = c;
    std::vector<RVector> kernel;
    if (a.rows() == 0) {
      for (std::size_t j = 0; j < mons.size(); ++j) {
        RVector v(mons.size(), Rational(0));
        v[j] = 1;
        kernel.push_back(v);
      }
    } else {
      kernel = nullspace(a);
    }
    for (const auto& v : kernel) {
      SymPoly u(dim);
      for (std::size_t j = 0; j < mons.size(); ++j)
        if (!is_zero(v[j])) u += v[j] * monomial(dim, mons[j]);
      out.push_back(u);
    }
  }
  return out;
}

/// gamma(u) = symmetrization of J^{1/2}(d) u, reduced mod U(g) k.
inline PBWElement rouviere_map(const SymPoly& u, const SymmetricPair& pair, const PBWAlgebra& U, int D,
                               const Rational& power = Rational(1, 2)) {
  if (!is_k_invariant(pair, u)) throw std::invalid_argument("rouviere_map needs a k-invariant polynomial");
  return reduce_mod_Uk(U.symmetrize(j_half_partial(u, pair, D, power)), pair);
}

struct HomomorphismReport {
  std::string pair;
  int degree = 0;
  std::vector<int> invariant_dims;  // per degree 0..D
  std::vector<nlohmann::json> entries;
  Rational max_residual{0};
  bool exact() const { return is_zero(max_residual); }
};

inline nlohmann::json to_json(const HomomorphismReport& r) {
  return {{"pair", r.pair},
          {"degree", r.degree},
          {"invariant_dims", r.invariant_dims},
          {"max_residual", to_string(r.max_residual)},
          {"exact", r.exact()},
          {"residuals", r.entries}};
}

/// max over invariant basis pairs u, v with deg u + deg v <= D of
/// |gamma(u v) - reduce(gamma(u) gamma(v))|.
inline HomomorphismReport check_homomorphism(const SymmetricPair& pair, int D, const Rational& power = Rational(1, 2),
                                             std::vector<int> p_order = {}) {
  if (D < 0 || D > 6) throw std::out_of_range("homomorphism check degree must be in [0, 6]");
  HomomorphismReport r;
  r.pair = pair.key();
  r.degree = D;
  const auto U = PBWAlgebra::adapted(pair, p_order);
  const auto basis = invariant_basis(pair, D);
  r.invariant_dims.assign(D + 1, 0);
  std::vector<int> deg;
  std::vector<PBWElement> gam;
  for (const auto& u : basis) {
    deg.push_back(u.degree());
    ++r.invariant_dims[deg.back()];
    gam.push_back(rouviere_map(u, pair, U, D, power));
  }
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i; j < basis.size(); ++j) {
      if (deg[i] + deg[j] > D || deg[i] == 0 || deg[j] == 0) continue;
      const auto lhs = rouviere_map(basis[i] * basis[j], pair, U, D, power);
      const auto rhs = reduce_mod_Uk(U.multiply(gam[i], gam[j]), pair);
      const Rational res = (lhs - rhs).max_abs_coefficient();
      r.max_residual = std::max(r.max_residual, res);
      r.entries.push_back({{"u", basis[i].to_string()}, {"v", basis[j].to_string()}, {"residual", to_string(res)}});
    }
  return r;
}

}  // namespace grexp
