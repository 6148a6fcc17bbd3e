#pragma once

#include <grexp/lie_core.hpp>
#include <grexp/matrix.hpp>
#include <grexp/rational.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace grexp {

inline constexpr int kMaxFreeDegree = 12;

// ---------------------------------------------------------------------------
// Words and the Lyndon basis. Words are strings over {'X', 'Y'} with X < Y.

inline void check_free_degree(int n) {
  if (n < 1 || n > kMaxFreeDegree)
    throw std::out_of_range("free Lie degree must be in [1, " + std::to_string(kMaxFreeDegree) + "]");
}

inline bool is_lyndon(const std::string& w) {
  if (w.empty()) return false;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w.substr(i) + w.substr(0, i) <= w) return false;
  return true;
}

/// Lyndon words of length exactly n in increasing lexicographic order (Duval).
inline std::vector<std::string> lyndon_words(int n) {
  check_free_degree(n);
  std::vector<std::string> out;
  std::string w = "X";
  while (!w.empty()) {
    if (static_cast<int>(w.size()) == n) out.push_back(w);
    const std::string base = w;
    while (static_cast<int>(w.size()) < n) w += base[w.size() % base.size()];
    while (!w.empty() && w.back() == 'Y') w.pop_back();
    if (!w.empty()) w.back() = 'Y';
  }
  return out;
}

/// (1/n) sum_{d | n} mu(d) 2^{n/d}.
inline int witt_dimension(int n) {
  auto mobius = [](int d) {
    int result = 1;
    for (int p = 2; p * p <= d; ++p) {
      if (d % p) continue;
      d /= p;
      if (d % p == 0) return 0;
      result = -result;
    }
    return d > 1 ? -result : result;
  };
  long long total = 0;
  for (int d = 1; d <= n; ++d)
    if (n % d == 0) total += static_cast<long long>(mobius(d)) << (n / d);
  return static_cast<int>(total / n);
}

/// w = u v with v the longest proper Lyndon suffix.
inline std::pair<std::string, std::string> standard_factorization(const std::string& w) {
  if (w.size() < 2) throw std::invalid_argument("standard factorization needs length >= 2");
  for (std::size_t i = 1; i < w.size(); ++i)
    if (is_lyndon(w.substr(i))) return {w.substr(0, i), w.substr(i)};
  throw std::logic_error("no Lyndon suffix");  // unreachable: the last letter is Lyndon
}

/// Binary bracket tree over leaves X and Y.
class LieWord {
 public:
  static LieWord leaf(char c) {
    if (c != 'X' && c != 'Y') throw std::invalid_argument("Lie word leaves must be X or Y");
    LieWord w;
    w.node_ = std::make_shared<Node>(Node{c, {}, {}, 1});
    return w;
  }
  static LieWord X() { return leaf('X'); }
  static LieWord Y() { return leaf('Y'); }
  static LieWord bracket(const LieWord& a, const LieWord& b) {
    LieWord w;
    w.node_ = std::make_shared<Node>(Node{0, a.node_, b.node_, a.degree() + b.degree()});
    return w;
  }

  /// Parses "X", "Y" or "[A,B]" (spaces ignored).
  static LieWord parse(const std::string& text) {
    std::string s;
    for (char c : text)
      if (c != ' ') s += c;
    std::size_t pos = 0;
    LieWord w = parse_at(s, pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters in Lie word: " + text);
    return w;
  }

  bool is_leaf() const { return node_->letter != 0; }
  char letter() const { return node_->letter; }
  LieWord left() const { return LieWord(node_->left); }
  LieWord right() const { return LieWord(node_->right); }
  int degree() const { return node_->degree; }

  std::string to_string() const {
    if (is_leaf()) return std::string(1, letter());
    return "[" + left().to_string() + "," + right().to_string() + "]";
  }

  /// Letters read left to right.
  std::string letters() const {
    if (is_leaf()) return std::string(1, letter());
    return left().letters() + right().letters();
  }

  int count(char c) const {
    const auto l = letters();
    return static_cast<int>(std::count(l.begin(), l.end(), c));
  }

 private:
  struct Node {
    char letter;
    std::shared_ptr<const Node> left, right;
    int degree;
  };
  LieWord() = default;
  explicit LieWord(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static LieWord parse_at(const std::string& s, std::size_t& pos) {
    if (pos >= s.size()) throw std::invalid_argument("unexpected end of Lie word");
    if (s[pos] == 'X' || s[pos] == 'Y') return leaf(s[pos++]);
    if (s[pos] != '[') throw std::invalid_argument("unexpected character in Lie word");
    ++pos;
    LieWord a = parse_at(s, pos);
    if (pos >= s.size() || s[pos] != ',') throw std::invalid_argument("expected ',' in Lie word");
    ++pos;
    LieWord b = parse_at(s, pos);
    if (pos >= s.size() || s[pos] != ']') throw std::invalid_argument("expected ']' in Lie word");
    ++pos;
    return bracket(a, b);
  }

  std::shared_ptr<const Node> node_;
};

/// Standard bracketing of a Lyndon word.
inline LieWord standard_bracketing(const std::string& w) {
  if (w.size() == 1) return LieWord::leaf(w[0]);
  const auto [u, v] = standard_factorization(w);
  return LieWord::bracket(standard_bracketing(u), standard_bracketing(v));
}

inline std::vector<LieWord> lyndon_basis(int degree) {
  std::vector<LieWord> out;
  for (const auto& w : lyndon_words(degree)) out.push_back(standard_bracketing(w));
  return out;
}

// ---------------------------------------------------------------------------
// Dense graded associative series on X, Y. Component n is indexed by the
// n-letter word read as a binary number (X = 0, Y = 1, first letter most
// significant), so lexicographic and numeric orders agree within a degree.

inline std::uint32_t word_index(const std::string& w) {
  std::uint32_t idx = 0;
  for (char c : w) idx = (idx << 1) | (c == 'Y' ? 1u : 0u);
  return idx;
}

inline std::string index_word(std::uint32_t idx, int n) {
  std::string w(n, 'X');
  for (int i = n - 1; i >= 0; --i, idx >>= 1) w[i] = (idx & 1u) ? 'Y' : 'X';
  return w;
}

template <class T>
class AssocSeries {
 public:
  AssocSeries() = default;
  explicit AssocSeries(int order) : order_(order), comp_(order + 1) {
    for (int n = 0; n <= order; ++n) comp_[n].assign(std::size_t{1} << n, T(0));
  }

  static AssocSeries scalar(int order, const T& c) {
    AssocSeries s(order);
    s.comp_[0][0] = c;
    return s;
  }
  static AssocSeries generator(int order, char c) {
    AssocSeries s(order);
    if (order >= 1) s.comp_[1][c == 'Y' ? 1 : 0] = T(1);
    return s;
  }

  int order() const { return order_; }
  std::vector<T>& component(int n) { return comp_[n]; }
  const std::vector<T>& component(int n) const { return comp_[n]; }
  T& at(const std::string& w) { return comp_[w.size()][word_index(w)]; }
  const T& at(const std::string& w) const { return comp_[w.size()][word_index(w)]; }

  AssocSeries& operator+=(const AssocSeries& o) {
    check(o);
    for (int n = 0; n <= order_; ++n)
      for (std::size_t i = 0; i < comp_[n].size(); ++i) comp_[n][i] += o.comp_[n][i];
    return *this;
  }
  AssocSeries& operator-=(const AssocSeries& o) {
    check(o);
    for (int n = 0; n <= order_; ++n)
      for (std::size_t i = 0; i < comp_[n].size(); ++i) comp_[n][i] -= o.comp_[n][i];
    return *this;
  }
  friend AssocSeries operator+(AssocSeries a, const AssocSeries& b) { return a += b; }
  friend AssocSeries operator-(AssocSeries a, const AssocSeries& b) { return a -= b; }
  friend AssocSeries operator*(const T& s, AssocSeries a) {
    for (auto& c : a.comp_)
      for (auto& x : c) x *= s;
    return a;
  }

  /// Truncated concatenation product.
  friend AssocSeries operator*(const AssocSeries& a, const AssocSeries& b) {
    a.check(b);
    AssocSeries r(a.order_);
    for (int p = 0; p <= a.order_; ++p)
      for (int q = 0; p + q <= a.order_; ++q) {
        const auto& ap = a.comp_[p];
        const auto& bq = b.comp_[q];
        auto& out = r.comp_[p + q];
        for (std::size_t i = 0; i < ap.size(); ++i) {
          if (is_zero(ap[i])) continue;
          for (std::size_t j = 0; j < bq.size(); ++j) {
            if (is_zero(bq[j])) continue;
            out[(i << q) | j] += ap[i] * bq[j];
          }
        }
      }
    return r;
  }

  friend AssocSeries commutator(const AssocSeries& a, const AssocSeries& b) { return a * b - b * a; }

  bool constant_free() const { return is_zero(comp_[0][0]); }

 private:
  void check(const AssocSeries& o) const {
    if (order_ != o.order_) throw std::invalid_argument("associative series order mismatch");
  }
  int order_ = 0;
  std::vector<std::vector<T>> comp_;
};

template <class T>
AssocSeries<T> assoc_exp(const AssocSeries<T>& a) {
  if (!a.constant_free()) throw std::invalid_argument("exp needs a series without constant term");
  AssocSeries<T> result = AssocSeries<T>::scalar(a.order(), T(1));
  AssocSeries<T> power = result;
  for (int k = 1; k <= a.order(); ++k) {
    power = (T(1) / T(k)) * (power * a);
    result += power;
  }
  return result;
}

/// log of a series with constant term 1.
template <class T>
AssocSeries<T> assoc_log(const AssocSeries<T>& a) {
  if (a.component(0)[0] != T(1)) throw std::invalid_argument("log needs constant term 1");
  AssocSeries<T> p = a - AssocSeries<T>::scalar(a.order(), T(1));
  AssocSeries<T> result(a.order());
  AssocSeries<T> power = AssocSeries<T>::scalar(a.order(), T(1));
  for (int k = 1; k <= a.order(); ++k) {
    power = power * p;
    const T c = T(k % 2 ? 1 : -1) / T(k);
    result += c * power;
  }
  return result;
}

namespace detail {

/// Sparse integer expansion of the standard bracketing of each Lyndon word.
struct LyndonExpansion {
  std::string word;
  std::uint32_t index;
  std::vector<std::pair<std::uint32_t, long long>> terms;
};

inline std::vector<long long> dense_expand(const std::string& w) {
  const int n = static_cast<int>(w.size());
  std::vector<long long> out(std::size_t{1} << n, 0);
  if (n == 1) {
    out[w[0] == 'Y' ? 1 : 0] = 1;
    return out;
  }
  const auto [u, v] = standard_factorization(w);
  const auto eu = dense_expand(u), ev = dense_expand(v);
  const int lu = static_cast<int>(u.size()), lv = static_cast<int>(v.size());
  for (std::size_t i = 0; i < eu.size(); ++i) {
    if (!eu[i]) continue;
    for (std::size_t j = 0; j < ev.size(); ++j) {
      if (!ev[j]) continue;
      out[(i << lv) | j] += eu[i] * ev[j];
      out[(j << lu) | i] -= eu[i] * ev[j];
    }
  }
  return out;
}

inline const std::vector<LyndonExpansion>& lyndon_expansions(int n) {
  check_free_degree(n);
  static std::mutex mu;
  static std::vector<std::unique_ptr<std::vector<LyndonExpansion>>> cache(kMaxFreeDegree + 1);
  std::lock_guard<std::mutex> lock(mu);
  if (!cache[n]) {
    auto v = std::make_unique<std::vector<LyndonExpansion>>();
    for (const auto& w : lyndon_words(n)) {
      LyndonExpansion e{w, word_index(w), {}};
      const auto dense = dense_expand(w);
      for (std::size_t i = 0; i < dense.size(); ++i)
        if (dense[i]) e.terms.emplace_back(static_cast<std::uint32_t>(i), dense[i]);
      v->push_back(std::move(e));
    }
    cache[n] = std::move(v);
  }
  return *cache[n];
}

template <class T>
double lie_tolerance() {
  if constexpr (std::is_same_v<T, Rational>)
    return 0.0;
  else
    return 1e-9;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lie series in the Lyndon basis.

/// Graded free Lie series: degree -> (Lyndon word -> coefficient), truncated
/// at `order`. Zero coefficients are never stored.
template <class T>
class BasicLieSeries {
 public:
  using Component = std::map<std::string, T>;

  BasicLieSeries() = default;
  explicit BasicLieSeries(int order) : order_(order) {
    if (order < 1 || order > kMaxFreeDegree) check_free_degree(order);
  }

  static BasicLieSeries generator(int order, char c) {
    BasicLieSeries s(order);
    s.set(std::string(1, c), T(1));
    return s;
  }
  static BasicLieSeries X(int order) { return generator(order, 'X'); }
  static BasicLieSeries Y(int order) { return generator(order, 'Y'); }

  int order() const { return order_; }
  const std::map<int, Component>& terms() const { return terms_; }

  /// Coefficient of a Lyndon basis element (0 if absent).
  T coefficient(const std::string& lyndon) const {
    auto it = terms_.find(static_cast<int>(lyndon.size()));
    if (it == terms_.end()) return T(0);
    auto jt = it->second.find(lyndon);
    return jt == it->second.end() ? T(0) : jt->second;
  }
  T coefficient(const LieWord& w) const { return coefficient(w.letters()); }

  void set(const std::string& lyndon, const T& c) {
    const int n = static_cast<int>(lyndon.size());
    if (n > order_) return;
    if (!is_lyndon(lyndon)) throw std::invalid_argument("not a Lyndon word: " + lyndon);
    if (is_zero(c)) {
      auto it = terms_.find(n);
      if (it != terms_.end()) {
        it->second.erase(lyndon);
        if (it->second.empty()) terms_.erase(it);
      }
      return;
    }
    terms_[n][lyndon] = c;
  }
  void add(const std::string& lyndon, const T& c) { set(lyndon, coefficient(lyndon) + c); }

  BasicLieSeries homogeneous(int degree) const {
    BasicLieSeries r(order_);
    auto it = terms_.find(degree);
    if (it != terms_.end()) r.terms_[degree] = it->second;
    return r;
  }
  BasicLieSeries truncated(int order) const {
    BasicLieSeries r(order);
    for (const auto& [n, comp] : terms_)
      if (n <= order) r.terms_[n] = comp;
    return r;
  }
  BasicLieSeries with_order(int order) const { return truncated(order); }

  bool is_zero_series() const { return terms_.empty(); }
  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& [n, comp] : terms_) s += comp.size();
    return s;
  }

  BasicLieSeries& operator+=(const BasicLieSeries& o) {
    check(o);
    for (const auto& [n, comp] : o.terms_)
      for (const auto& [w, c] : comp) add(w, c);
    return *this;
  }
  BasicLieSeries& operator-=(const BasicLieSeries& o) {
    check(o);
    for (const auto& [n, comp] : o.terms_)
      for (const auto& [w, c] : comp) add(w, -c);
    return *this;
  }
  friend BasicLieSeries operator+(BasicLieSeries a, const BasicLieSeries& b) { return a += b; }
  friend BasicLieSeries operator-(BasicLieSeries a, const BasicLieSeries& b) { return a -= b; }
  friend BasicLieSeries operator*(const T& s, const BasicLieSeries& a) {
    BasicLieSeries r(a.order_);
    if (is_zero(s)) return r;
    for (const auto& [n, comp] : a.terms_)
      for (const auto& [w, c] : comp) r.terms_[n][w] = s * c;
    return r;
  }
  friend BasicLieSeries operator-(const BasicLieSeries& a) { return T(-1) * a; }
  bool operator==(const BasicLieSeries& o) const { return order_ == o.order_ && terms_ == o.terms_; }

  template <class U>
  BasicLieSeries<U> cast() const {
    BasicLieSeries<U> r(order_);
    for (const auto& [n, comp] : terms_)
      for (const auto& [w, c] : comp) {
        if constexpr (std::is_same_v<T, Rational>)
          r.set(w, scalar_cast<U>(c));
        else
          r.set(w, static_cast<U>(c));
      }
    return r;
  }

  void check(const BasicLieSeries& o) const {
    if (order_ != o.order_) throw std::invalid_argument("Lie series truncation order mismatch");
  }

 private:
  int order_ = 1;
  std::map<int, Component> terms_;
};

using LieSeries = BasicLieSeries<Rational>;
using LieSeriesD = BasicLieSeries<double>;

/// Associative image of a Lie series (standard bracketings expanded).
template <class T>
AssocSeries<T> to_assoc(const BasicLieSeries<T>& s, int order) {
  AssocSeries<T> r(order);
  for (const auto& [n, comp] : s.terms()) {
    if (n > order) continue;
    const auto& exps = detail::lyndon_expansions(n);
    auto& out = r.component(n);
    for (const auto& e : exps) {
      auto it = comp.find(e.word);
      if (it == comp.end()) continue;
      for (const auto& [idx, k] : e.terms) out[idx] += it->second * T(k);
    }
  }
  return r;
}

/// Decomposes the degree-n component of an associative series, which must be a
/// Lie element, into the Lyndon basis. Throws if a non-Lie remainder is left.
template <class T>
typename BasicLieSeries<T>::Component decompose_homogeneous(std::vector<T> v, int n) {
  typename BasicLieSeries<T>::Component out;
  double scale = 0;
  for (const auto& x : v) scale = std::max(scale, magnitude(x));
  const double tol = detail::lie_tolerance<T>() * std::max(1.0, scale);
  // Each standard bracketing is its Lyndon word plus strictly larger words, so
  // the smallest surviving word is always the next basis element.
  for (const auto& e : detail::lyndon_expansions(n)) {
    const T c = v[e.index];
    if (magnitude(c) <= tol) continue;
    for (const auto& [idx, k] : e.terms) v[idx] -= c * T(k);
    out[e.word] = c;
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    if (magnitude(v[i]) > tol)
      throw std::domain_error("associative element of degree " + std::to_string(n) +
                              " is not a Lie element (word " + index_word(static_cast<std::uint32_t>(i), n) + ")");
  return out;
}

template <class T>
BasicLieSeries<T> from_assoc(const AssocSeries<T>& a, int order) {
  BasicLieSeries<T> r(order);
  for (int n = 1; n <= std::min(order, a.order()); ++n)
    for (const auto& [w, c] : decompose_homogeneous<T>(a.component(n), n)) r.set(w, c);
  return r;
}

/// Canonical form of a bracket tree in the Lyndon basis of its degree.
inline LieSeries canonicalize(const LieWord& w, int order = -1) {
  const int n = w.degree();
  check_free_degree(n);
  if (order < 0) order = n;
  std::function<std::vector<Rational>(const LieWord&)> expand = [&](const LieWord& t) {
    std::vector<Rational> out(std::size_t{1} << t.degree(), Rational(0));
    if (t.is_leaf()) {
      out[t.letter() == 'Y' ? 1 : 0] = 1;
      return out;
    }
    const auto a = expand(t.left()), b = expand(t.right());
    const int la = t.left().degree(), lb = t.right().degree();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (is_zero(a[i])) continue;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (is_zero(b[j])) continue;
        out[(i << lb) | j] += a[i] * b[j];
        out[(j << la) | i] -= a[i] * b[j];
      }
    }
    return out;
  };
  LieSeries r(order);
  if (n > order) return r;
  for (const auto& [word, c] : decompose_homogeneous<Rational>(expand(w), n)) r.set(word, c);
  return r;
}

/// Graded bracket truncated at the common order.
template <class T>
BasicLieSeries<T> bracket(const BasicLieSeries<T>& a, const BasicLieSeries<T>& b) {
  a.check(b);
  const int N = a.order();
  BasicLieSeries<T> r(N);
  std::map<int, std::vector<T>> acc;
  for (const auto& [p, ca] : a.terms())
    for (const auto& [q, cb] : b.terms()) {
      if (p + q > N) continue;
      const auto ea = to_assoc(a.homogeneous(p), p).component(p);
      const auto eb = to_assoc(b.homogeneous(q), q).component(q);
      auto& out = acc[p + q];
      if (out.empty()) out.assign(std::size_t{1} << (p + q), T(0));
      for (std::size_t i = 0; i < ea.size(); ++i) {
        if (is_zero(ea[i])) continue;
        for (std::size_t j = 0; j < eb.size(); ++j) {
          if (is_zero(eb[j])) continue;
          const T prod = ea[i] * eb[j];
          out[(i << q) | j] += prod;
          out[(j << p) | i] -= prod;
        }
      }
    }
  for (auto& [n, v] : acc)
    for (const auto& [w, c] : decompose_homogeneous<T>(std::move(v), n)) r.set(w, c);
  return r;
}

// ---------------------------------------------------------------------------
// Evaluation under homomorphisms X -> x, Y -> y.

/// Evaluates every basis element through its standard bracketing, memoized on
/// Lyndon words. `br(a, b)` is the target bracket, `axpy(acc, c, v)` adds c*v.
template <class T, class V, class Bracket, class Axpy>
V evaluate_series(const BasicLieSeries<T>& s, const V& x, const V& y, const V& zero, Bracket br, Axpy axpy) {
  std::map<std::string, V> memo;
  std::function<const V&(const std::string&)> eval = [&](const std::string& w) -> const V& {
    auto it = memo.find(w);
    if (it != memo.end()) return it->second;
    V value = w.size() == 1 ? (w[0] == 'X' ? x : y) : V{};
    if (w.size() > 1) {
      const auto [u, v] = standard_factorization(w);
      const V& vu = eval(u);
      const V& vv = eval(v);
      value = br(vu, vv);
    }
    return memo.emplace(w, std::move(value)).first->second;
  };
  V acc = zero;
  for (const auto& [n, comp] : s.terms())
    for (const auto& [w, c] : comp) axpy(acc, c, eval(w));
  return acc;
}

/// Image of the series in a concrete Lie algebra. Exact when T is Rational.
template <class T>
Vector<T> substitute_and_evaluate(const BasicLieSeries<T>& s, const LieAlgebra& g, const Vector<T>& x,
                                  const Vector<T>& y) {
  g.check_vector(x.size());
  g.check_vector(y.size());
  return evaluate_series(
      s, x, y, Vector<T>(g.dim(), T(0)), [&](const Vector<T>& a, const Vector<T>& b) { return g.bracket(a, b); },
      [](Vector<T>& acc, const T& c, const Vector<T>& v) {
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * v[i];
      });
}

/// Substitutes Lie series A, B for X, Y (composition in the free Lie algebra).
template <class T>
BasicLieSeries<T> compose(const BasicLieSeries<T>& s, const BasicLieSeries<T>& a, const BasicLieSeries<T>& b) {
  const int N = s.order();
  const auto ax = to_assoc(a.truncated(N), N), bx = to_assoc(b.truncated(N), N);
  const auto image = evaluate_series(
      s, ax, bx, AssocSeries<T>(N), [](const AssocSeries<T>& u, const AssocSeries<T>& v) { return commutator(u, v); },
      [](AssocSeries<T>& acc, const T& c, const AssocSeries<T>& v) { acc += c * v; });
  return from_assoc(image, N);
}

/// Value and Y-differential of a Lie word at (x, y): the matrix of
/// H -> d/de word(x, y + e H) at e = 0.
template <class T>
Matrix<T> differential_in_Y(const LieWord& w, const LieAlgebra& g, const Vector<T>& x, const Vector<T>& y) {
  g.check_vector(x.size());
  g.check_vector(y.size());
  struct Dual {
    Vector<T> v;
    Matrix<T> d;
  };
  const std::size_t dim = g.dim();
  std::function<Dual(const LieWord&)> rec = [&](const LieWord& t) -> Dual {
    if (t.is_leaf()) {
      if (t.letter() == 'X') return {x, Matrix<T>(dim, dim)};
      return {y, Matrix<T>::identity(dim)};
    }
    const Dual a = rec(t.left()), b = rec(t.right());
    // [a, b]' = ad(a) b' - ad(b) a'
    return {g.bracket(a.v, b.v), ad(g, a.v) * b.d - ad(g, b.v) * a.d};
  };
  return rec(w).d;
}

/// Y-differential of a whole series (sum over its Lyndon basis elements).
template <class T>
Matrix<T> differential_in_Y(const BasicLieSeries<T>& s, const LieAlgebra& g, const Vector<T>& x,
                            const Vector<T>& y) {
  Matrix<T> total(g.dim(), g.dim());
  for (const auto& [n, comp] : s.terms())
    for (const auto& [w, c] : comp) total += c * differential_in_Y(standard_bracketing(w), g, x, y);
  return total;
}

/// Derivation of the free Lie algebra fixed by its values on X and Y, applied
/// to a series and truncated at its order.
template <class T>
BasicLieSeries<T> apply_derivation(const BasicLieSeries<T>& s, const BasicLieSeries<T>& dx,
                                   const BasicLieSeries<T>& dy) {
  const int N = s.order();
  std::map<std::string, std::pair<BasicLieSeries<T>, BasicLieSeries<T>>> memo;  // word -> (value, derivative)
  std::function<const std::pair<BasicLieSeries<T>, BasicLieSeries<T>>&(const std::string&)> rec =
      [&](const std::string& w) -> const std::pair<BasicLieSeries<T>, BasicLieSeries<T>>& {
    auto it = memo.find(w);
    if (it != memo.end()) return it->second;
    std::pair<BasicLieSeries<T>, BasicLieSeries<T>> r;
    if (w.size() == 1) {
      r = {BasicLieSeries<T>::generator(N, w[0]), w[0] == 'X' ? dx.truncated(N) : dy.truncated(N)};
    } else {
      const auto [u, v] = standard_factorization(w);
      const auto& a = rec(u);
      const auto& b = rec(v);
      r = {bracket(a.first, b.first), bracket(a.second, b.first) + bracket(a.first, b.second)};
    }
    return memo.emplace(w, std::move(r)).first->second;
  };
  BasicLieSeries<T> out(N);
  for (const auto& [n, comp] : s.terms())
    for (const auto& [w, c] : comp) out += c * rec(w).second;
  return out;
}

// ---------------------------------------------------------------------------
// Reference series.

/// log(exp X exp Y) to total degree N, through the Dynkin-Specht-Wever
/// projection w -> (1/n) [w_1, [w_2, ... w_n]] of the associative logarithm.
inline LieSeries bch_dynkin(int N) {
  if (N < 1 || N > 10) throw std::out_of_range("bch_dynkin order must be in [1, 10]");
  using A = AssocSeries<Rational>;
  const A z = assoc_log(assoc_exp(A::generator(N, 'X')) * assoc_exp(A::generator(N, 'Y')));
  LieSeries out(N);
  for (int n = 1; n <= N; ++n) {
    const auto& zn = z.component(n);
    std::vector<Rational> projected(zn.size(), Rational(0));
    for (std::size_t i = 0; i < zn.size(); ++i) {
      if (is_zero(zn[i])) continue;
      // right-normed bracket of the word, expanded letter by letter from the right
      const std::string w = index_word(static_cast<std::uint32_t>(i), n);
      std::vector<std::pair<std::string, int>> cur{{std::string(1, w.back()), 1}};
      for (int k = n - 2; k >= 0; --k) {
        std::vector<std::pair<std::string, int>> next;
        for (const auto& [t, c] : cur) {
          next.emplace_back(std::string(1, w[k]) + t, c);
          next.emplace_back(t + std::string(1, w[k]), -c);
        }
        cur = std::move(next);
      }
      const Rational f = zn[i] / n;
      for (const auto& [t, c] : cur) projected[word_index(t)] += f * c;
    }
    for (const auto& [w, c] : decompose_homogeneous<Rational>(std::move(projected), n)) out.set(w, c);
  }
  return out;
}

/// Z_sym(X, Y) = (1/2) BCH(X, BCH(2Y, X)), so exp(2 Z_sym) = exp(X) exp(2Y) exp(X).
inline LieSeries zsym_reference(int N) {
  if (N < 1 || N > 10) throw std::out_of_range("zsym_reference order must be in [1, 10]");
  const auto z = bch_dynkin(N);
  const auto X = LieSeries::X(N), Y = LieSeries::Y(N);
  const auto inner = compose(z, Rational(2) * Y, X);
  return Rational(1, 2) * compose(z, X, inner);
}

/// Same series via the other nesting (1/2) BCH(BCH(X, 2Y), X).
inline LieSeries zsym_right_nested(int N) {
  const auto z = bch_dynkin(N);
  const auto X = LieSeries::X(N), Y = LieSeries::Y(N);
  return Rational(1, 2) * compose(z, compose(z, X, Rational(2) * Y), X);
}

/// Same series straight from the associative logarithm of exp(X) exp(2Y) exp(X).
inline LieSeries zsym_direct(int N) {
  using A = AssocSeries<Rational>;
  const A ex = assoc_exp(A::generator(N, 'X'));
  const A l = assoc_log(ex * assoc_exp(Rational(2) * A::generator(N, 'Y')) * ex);
  return Rational(1, 2) * from_assoc(l, N);
}

// ---------------------------------------------------------------------------
// Serialization: {"degree:[bracket string]": "p/q"}.

template <class T>
nlohmann::json series_to_json(const BasicLieSeries<T>& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [n, comp] : s.terms())
    for (const auto& [w, c] : comp) {
      const std::string key = std::to_string(n) + ":" + standard_bracketing(w).to_string();
      if constexpr (std::is_same_v<T, Rational>)
        j[key] = to_string(c);
      else
        j[key] = c;
    }
  return j;
}

inline LieSeries series_from_json(const nlohmann::json& j, int order) {
  LieSeries s(order);
  for (const auto& [key, value] : j.items()) {
    const auto colon = key.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("series key must be degree:word");
    const int n = std::stoi(key.substr(0, colon));
    const auto word = LieWord::parse(key.substr(colon + 1));
    if (word.degree() != n) throw std::invalid_argument("series key degree mismatch: " + key);
    const Rational c = value.is_string() ? parse_rational(value.get<std::string>()) : Rational(value.get<long long>());
    s += c * canonicalize(word, order);
  }
  return s;
}

}  // namespace grexp
