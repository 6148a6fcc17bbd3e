#pragma once

#include <grexp/lie_core.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grexp {

struct CatalogEntry {
  SymmetricPair pair;
  std::optional<RMatrix> theta;  // present for very symmetric entries
  bool solvable = false;
  std::string description;

  const std::string& key() const { return pair.key(); }
  bool very_symmetric() const { return theta.has_value(); }
  std::optional<VerySymmetricStructure> structure() const {
    if (!theta) return std::nullopt;
    return VerySymmetricStructure{pair, *theta};
  }
};

namespace detail {

inline Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

inline Eigen::MatrixXd block_diag(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

/// Entries (i < j) read off a full antisymmetric table.
inline std::vector<BracketEntry> upper_entries(int d, const std::vector<Rational>& table) {
  std::vector<BracketEntry> e;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        const auto& c = table[(static_cast<std::size_t>(i) * d + j) * d + k];
        if (!is_zero(c)) e.push_back({i, j, k, c});
      }
  return e;
}

/// g x g with sigma(X, Y) = (Y, X), in the adapted basis
/// k_i = (e_i, e_i), p_i = (e_i, -e_i); theta swaps k_i and p_i.
inline CatalogEntry product_with_diagonal(const std::string& key, const LieAlgebra& base,
                                          const std::vector<Eigen::MatrixXd>& base_rep,
                                          const std::string& description) {
  const int n = base.dim();
  const int d = 2 * n;
  std::vector<Rational> table(static_cast<std::size_t>(d) * d * d);
  auto put = [&](int i, int j, int k, const Rational& c) {
    table[(static_cast<std::size_t>(i) * d + j) * d + k] += c;
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const Rational& s = base.structure(a, b, c);
        if (is_zero(s)) continue;
        put(a, b, c, s);              // [k_a, k_b] = k_[a,b]
        put(a, n + b, n + c, s);      // [k_a, p_b] = p_[a,b]
        put(n + a, b, n + c, s);      // [p_a, k_b] = p_[a,b]
        put(n + a, n + b, c, s);      // [p_a, p_b] = k_[a,b]
      }
  std::vector<Eigen::MatrixXd> rep;
  for (int a = 0; a < n; ++a) rep.push_back(block_diag(base_rep[a], base_rep[a]));
  for (int a = 0; a < n; ++a) rep.push_back(block_diag(base_rep[a], -base_rep[a]));
  LieAlgebra g(key, d, upper_entries(d, table), rep);
  std::vector<int> signs(d, 1);
  for (int a = n; a < d; ++a) signs[a] = -1;
  RMatrix theta(d, d);
  for (int a = 0; a < n; ++a) {
    theta(n + a, a) = 1;
    theta(a, n + a) = 1;
  }
  return {SymmetricPair(key, std::move(g), signs), theta, is_solvable(base), description};
}

inline LieAlgebra sl2() {
  // basis (h, e, f)
  return LieAlgebra("sl2", 3, {{0, 1, 1, 2}, {0, 2, 2, -2}, {1, 2, 0, 1}},
                    std::vector<Eigen::MatrixXd>{mat2(1, 0, 0, -1), mat2(0, 1, 0, 0), mat2(0, 0, 1, 0)});
}

}  // namespace detail

/// Fixed, versioned list of symmetric pairs used by tests and the CLI. Every
/// basis is adapted to sigma: k vectors first, then p.
inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    using detail::mat2;
    std::vector<CatalogEntry> out;

    {
      std::vector<Eigen::MatrixXd> rep;
      for (int i = 0; i < 3; ++i) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
        m(i, i) = 1;
        rep.push_back(m);
      }
      LieAlgebra g("abelian", 3, {}, rep);
      out.push_back({SymmetricPair("abelian", g, {1, -1, -1}), std::nullopt, true,
                     "3-dim abelian algebra, k = <e0>, p = <e1, e2>"});
    }
    {
      // Heisenberg [a, b] = c with sigma(a) = -a, sigma(c) = -c, sigma(b) = b.
      // Adapted basis e0 = b (k), e1 = a, e2 = c (p).
      auto E = [](int r, int c) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
        m(r, c) = 1;
        return m;
      };
      LieAlgebra g("heisenberg", 3, {{0, 1, 2, -1}}, std::vector<Eigen::MatrixXd>{E(1, 2), E(0, 1), E(0, 2)});
      out.push_back({SymmetricPair("heisenberg", g, {1, -1, -1}), std::nullopt, true,
                     "Heisenberg algebra, involution negating a and the center c"});
    }
    {
      LieAlgebra aff("aff1", 2, {{0, 1, 1, 1}}, std::vector<Eigen::MatrixXd>{mat2(1, 0, 0, 0), mat2(0, 1, 0, 0)});
      out.push_back(detail::product_with_diagonal("aff1xaff1", aff, *aff.matrix_rep(),
                                                  "aff(1) x aff(1) / diagonal"));
    }
    {
      const auto base = detail::sl2();
      out.push_back(detail::product_with_diagonal("sl2xsl2", base, *base.matrix_rep(),
                                                  "sl(2) x sl(2) / diagonal"));
    }
    {
      // sl(2, C) as a real algebra: k = sl(2, R) = <h, e, f>, p = i sl(2, R).
      const auto base = detail::sl2();
      const int d = 6;
      std::vector<Rational> table(static_cast<std::size_t>(d) * d * d);
      auto put = [&](int i, int j, int k, const Rational& c) {
        table[(static_cast<std::size_t>(i) * d + j) * d + k] += c;
      };
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c) {
            const Rational& s = base.structure(a, b, c);
            if (is_zero(s)) continue;
            put(a, b, c, s);
            put(a, 3 + b, 3 + c, s);
            put(3 + a, b, 3 + c, s);
            put(3 + a, 3 + b, c, -s);
          }
      std::vector<Eigen::MatrixXd> rep;
      auto realify = [](const Eigen::MatrixXd& re, const Eigen::MatrixXd& im) {
        Eigen::MatrixXd m(4, 4);
        m << re, -im, im, re;
        return m;
      };
      const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
      for (int a = 0; a < 3; ++a) rep.push_back(realify((*base.matrix_rep())[a], zero));
      for (int a = 0; a < 3; ++a) rep.push_back(realify(zero, (*base.matrix_rep())[a]));
      LieAlgebra g("sl2C", d, detail::upper_entries(d, table), rep);
      RMatrix theta(d, d);  // multiplication by i
      for (int a = 0; a < 3; ++a) {
        theta(3 + a, a) = 1;
        theta(a, 3 + a) = -1;
      }
      out.push_back({SymmetricPair("sl2C/sl2R", g, {1, 1, 1, -1, -1, -1}), theta, false,
                     "sl(2, C) over its real form sl(2, R)"});
    }
    {
      // sl(2, R) with the Cartan involution X -> -X^T; e0 = e - f (k), e1 = h, e2 = e + f (p).
      LieAlgebra g("sl2R", 3, {{0, 1, 2, -2}, {0, 2, 1, 2}, {1, 2, 0, 2}},
                   std::vector<Eigen::MatrixXd>{mat2(0, 1, -1, 0), mat2(1, 0, 0, -1), mat2(0, 1, 1, 0)});
      out.push_back({SymmetricPair("sl2R-cartan", g, {1, -1, -1}), std::nullopt, false,
                     "sl(2, R) with its Cartan involution (neither solvable nor very symmetric)"});
    }
    return out;
  }();
  return entries;
}

inline const CatalogEntry& catalog_entry(const std::string& key) {
  for (const auto& e : catalog())
    if (e.key() == key) return e;
  throw std::invalid_argument("unknown catalog pair: " + key);
}

}  // namespace grexp
