#pragma once

#include <grexp/matrix.hpp>
#include <grexp/rational.hpp>

#include <Eigen/Dense>

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace grexp {

/// One structure constant [e_i, e_j] += coeff * e_k.
struct BracketEntry {
  int i = 0;
  int j = 0;
  int k = 0;
  Rational coeff;
};

/// A reported failure of an algebraic invariant. Validation never throws.
struct Violation {
  std::string kind;
  std::vector<int> indices;
  double residual = 0.0;
  std::string detail;
};

/// Finite-dimensional real Lie algebra given by exact structure constants in a
/// fixed basis e_0 ... e_{d-1}. Immutable after construction.
class LieAlgebra {
 public:
  LieAlgebra() = default;

  /// Builds from entries with i < j; the table is antisymmetrized.
  LieAlgebra(std::string name, int dim, const std::vector<BracketEntry>& entries,
             std::optional<std::vector<Eigen::MatrixXd>> matrix_rep = std::nullopt)
      : name_(std::move(name)), dim_(dim), table_(static_cast<std::size_t>(dim) * dim * dim),
        rep_(std::move(matrix_rep)) {
    if (dim <= 0) throw std::invalid_argument("Lie algebra dimension must be positive");
    for (const auto& e : entries) {
      check_index(e.i);
      check_index(e.j);
      check_index(e.k);
      if (e.i == e.j) throw std::invalid_argument("bracket entry with i == j");
      at(e.i, e.j, e.k) += e.coeff;
      at(e.j, e.i, e.k) -= e.coeff;
    }
    if (rep_ && static_cast<int>(rep_->size()) != dim)
      throw std::invalid_argument("matrix_rep must have one matrix per basis element");
  }

  /// Raw table c[i][j][k] without symmetrization (used to build corrupted fixtures).
  static LieAlgebra from_raw_table(std::string name, int dim, std::vector<Rational> table) {
    if (table.size() != static_cast<std::size_t>(dim) * dim * dim)
      throw std::invalid_argument("structure table has wrong size");
    LieAlgebra g;
    g.name_ = std::move(name);
    g.dim_ = dim;
    g.table_ = std::move(table);
    return g;
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }

  const Rational& structure(int i, int j, int k) const { return table_[index(i, j, k)]; }
  const std::vector<Rational>& table() const { return table_; }

  /// [e_i, e_j] as a sparse list of (k, coefficient).
  std::vector<std::pair<int, Rational>> basis_bracket(int i, int j) const {
    std::vector<std::pair<int, Rational>> out;
    for (int k = 0; k < dim_; ++k)
      if (!is_zero(structure(i, j, k))) out.emplace_back(k, structure(i, j, k));
    return out;
  }

  template <class T>
  Vector<T> bracket(const Vector<T>& x, const Vector<T>& y) const {
    check_vector(x.size());
    check_vector(y.size());
    Vector<T> out(dim_, T(0));
    for (int i = 0; i < dim_; ++i) {
      if (is_zero(x[i])) continue;
      for (int j = 0; j < dim_; ++j) {
        if (is_zero(y[j])) continue;
        const T xy = x[i] * y[j];
        for (int k = 0; k < dim_; ++k) {
          const Rational& c = structure(i, j, k);
          if (!is_zero(c)) out[k] += scalar_cast<T>(c) * xy;
        }
      }
    }
    return out;
  }

  const std::optional<std::vector<Eigen::MatrixXd>>& matrix_rep() const { return rep_; }

  Vector<Rational> basis_vector(int i) const {
    check_index(i);
    Vector<Rational> v(dim_, Rational(0));
    v[i] = 1;
    return v;
  }

  void check_vector(std::size_t n) const {
    if (n != static_cast<std::size_t>(dim_))
      throw std::invalid_argument("vector length " + std::to_string(n) +
                                  " does not match algebra dimension " + std::to_string(dim_));
  }

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }
  Rational& at(int i, int j, int k) { return table_[index(i, j, k)]; }
  void check_index(int i) const {
    if (i < 0 || i >= dim_) throw std::invalid_argument("basis index out of range");
  }

  std::string name_;
  int dim_ = 0;
  std::vector<Rational> table_;
  std::optional<std::vector<Eigen::MatrixXd>> rep_;
};

/// Matrix of y -> [x, y].
template <class T>
Matrix<T> ad(const LieAlgebra& g, const Vector<T>& x) {
  g.check_vector(x.size());
  const int d = g.dim();
  Matrix<T> m(d, d);
  for (int i = 0; i < d; ++i) {
    if (is_zero(x[i])) continue;
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        const Rational& c = g.structure(i, j, k);
        if (!is_zero(c)) m(k, j) += x[i] * scalar_cast<T>(c);
      }
  }
  return m;
}

inline std::vector<Violation> validate(const LieAlgebra& g) {
  std::vector<Violation> out;
  const int d = g.dim();
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        const Rational s = g.structure(i, j, k) + g.structure(j, i, k);
        if (!is_zero(s))
          out.push_back({"antisymmetry", {i, j, k}, magnitude(s), "c^k_ij + c^k_ji = " + to_string(s)});
      }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        const auto ei = g.basis_vector(i), ej = g.basis_vector(j), ek = g.basis_vector(k);
        const auto r = g.bracket(ei, g.bracket(ej, ek)) + g.bracket(ej, g.bracket(ek, ei)) +
                       g.bracket(ek, g.bracket(ei, ej));
        if (max_abs(r) > 0) {
          std::ostringstream os;
          os << "Jacobiator = (";
          for (int c = 0; c < d; ++c) os << (c ? ", " : "") << to_string(r[c]);
          os << ")";
          out.push_back({"jacobi", {i, j, k}, max_abs(r), os.str()});
        }
      }
  if (const auto& rep = g.matrix_rep()) {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        Eigen::MatrixXd comm = (*rep)[i] * (*rep)[j] - (*rep)[j] * (*rep)[i];
        for (int k = 0; k < d; ++k) comm -= to_double(g.structure(i, j, k)) * (*rep)[k];
        const double res = comm.cwiseAbs().maxCoeff();
        if (res > 1e-12) out.push_back({"matrix_rep", {i, j}, res, "commutator mismatch"});
      }
  }
  return out;
}

/// Span of all brackets [a, b] with a, b in the span of `rows` (rows of basis vectors).
inline RMatrix derived_span(const LieAlgebra& g, const std::vector<RVector>& basis) {
  std::vector<RVector> gens;
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = a + 1; b < basis.size(); ++b) gens.push_back(g.bracket(basis[a], basis[b]));
  RMatrix m(gens.size(), g.dim());
  for (std::size_t r = 0; r < gens.size(); ++r)
    for (int c = 0; c < g.dim(); ++c) m(r, c) = gens[r][c];
  return m;
}

/// True iff the derived series reaches 0.
inline bool is_solvable(const LieAlgebra& g) {
  std::vector<RVector> current;
  for (int i = 0; i < g.dim(); ++i) current.push_back(g.basis_vector(i));
  while (!current.empty()) {
    RMatrix m = derived_span(g, current);
    const auto pivots = row_reduce(m);
    if (pivots.size() == current.size()) return false;  // [D, D] = D, series stalls
    std::vector<RVector> next;
    for (std::size_t r = 0; r < pivots.size(); ++r) {
      RVector v(g.dim());
      for (int c = 0; c < g.dim(); ++c) v[c] = m(r, c);
      next.push_back(std::move(v));
    }
    current = std::move(next);
  }
  return true;
}

/// Same basis, every structure constant doubled.
inline LieAlgebra doubled(const LieAlgebra& g) {
  auto table = g.table();
  for (auto& c : table) c *= 2;
  std::optional<std::vector<Eigen::MatrixXd>> rep;
  if (g.matrix_rep()) {
    rep = *g.matrix_rep();
    for (auto& m : *rep) m *= 2.0;
  }
  LieAlgebra out = LieAlgebra::from_raw_table(g.name() + "_2", g.dim(), std::move(table));
  if (rep) {
    std::vector<BracketEntry> entries;
    for (int i = 0; i < g.dim(); ++i)
      for (int j = i + 1; j < g.dim(); ++j)
        for (int k = 0; k < g.dim(); ++k)
          if (!is_zero(out.structure(i, j, k))) entries.push_back({i, j, k, out.structure(i, j, k)});
    out = LieAlgebra(out.name(), g.dim(), entries, std::move(rep));
  }
  return out;
}

/// (g, sigma) with sigma diagonal +-1 in the chosen basis: k = +1, p = -1.
class SymmetricPair {
 public:
  SymmetricPair() = default;

  SymmetricPair(std::string key, LieAlgebra algebra, const std::vector<int>& signs)
      : key_(std::move(key)), algebra_(std::move(algebra)) {
    algebra_.check_vector(signs.size());
    sigma_ = RMatrix(signs.size(), signs.size());
    for (std::size_t i = 0; i < signs.size(); ++i) {
      if (signs[i] != 1 && signs[i] != -1) throw std::invalid_argument("sigma entries must be +1 or -1");
      sigma_(i, i) = signs[i];
      (signs[i] == 1 ? k_ : p_).push_back(static_cast<int>(i));
    }
  }

  const std::string& key() const { return key_; }
  const LieAlgebra& algebra() const { return algebra_; }
  const RMatrix& sigma() const { return sigma_; }
  const std::vector<int>& k_indices() const { return k_; }
  const std::vector<int>& p_indices() const { return p_; }
  int dim() const { return algebra_.dim(); }

  /// Vector supported on p with the given p-coordinates.
  template <class T>
  Vector<T> embed_p(const Vector<T>& coords) const {
    if (coords.size() != p_.size()) throw std::invalid_argument("p-coordinate vector has wrong length");
    Vector<T> v(dim(), T(0));
    for (std::size_t a = 0; a < p_.size(); ++a) v[p_[a]] = coords[a];
    return v;
  }

  template <class T>
  Vector<T> project_k(const Vector<T>& v) const {
    Vector<T> r(dim(), T(0));
    for (int i : k_) r[i] = v[i];
    return r;
  }

  template <class T>
  Vector<T> project_p(const Vector<T>& v) const {
    Vector<T> r(dim(), T(0));
    for (int i : p_) r[i] = v[i];
    return r;
  }

 private:
  std::string key_;
  LieAlgebra algebra_;
  RMatrix sigma_;
  std::vector<int> k_;
  std::vector<int> p_;
};

inline std::vector<Violation> validate(const SymmetricPair& pair) {
  auto out = validate(pair.algebra());
  const auto& g = pair.algebra();
  const int d = g.dim();
  if (!(pair.sigma() * pair.sigma() == RMatrix::identity(d)))
    out.push_back({"sigma_involution", {}, 1.0, "sigma^2 != 1"});
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const auto lhs = pair.sigma() * g.bracket(g.basis_vector(i), g.basis_vector(j));
      const auto rhs = g.bracket(pair.sigma() * g.basis_vector(i), pair.sigma() * g.basis_vector(j));
      const auto diff = lhs - rhs;
      if (max_abs(diff) > 0) out.push_back({"sigma_automorphism", {i, j}, max_abs(diff), ""});
    }
  if (pair.k_indices().size() + pair.p_indices().size() != static_cast<std::size_t>(d))
    out.push_back({"eigenspace_dimensions", {}, 1.0, "|k| + |p| != dim"});
  return out;
}

/// Symmetric pair plus an invertible theta that swaps k and p and commutes with
/// every adjoint operator.
struct VerySymmetricStructure {
  SymmetricPair pair;
  RMatrix theta;
};

inline std::vector<Violation> check_very_symmetric(const VerySymmetricStructure& s) {
  std::vector<Violation> out;
  const auto& g = s.pair.algebra();
  const int d = g.dim();
  if (s.theta.rows() != static_cast<std::size_t>(d) || s.theta.cols() != static_cast<std::size_t>(d)) {
    out.push_back({"theta_shape", {}, 1.0, "theta must be dim x dim"});
    return out;
  }
  const auto& k = s.pair.k_indices();
  const auto& p = s.pair.p_indices();
  if (!s.theta.block(k, k).is_zero_matrix())
    out.push_back({"theta_k_to_p", {}, max_abs(s.theta.block(k, k)), "theta(k) has a k-component"});
  if (!s.theta.block(p, p).is_zero_matrix())
    out.push_back({"theta_p_to_k", {}, max_abs(s.theta.block(p, p)), "theta(p) has a p-component"});
  for (int i = 0; i < d; ++i) {
    const RMatrix a = ad(g, g.basis_vector(i));
    const RMatrix c = s.theta * a - a * s.theta;
    if (!c.is_zero_matrix()) out.push_back({"theta_commutes_ad", {i}, max_abs(c), ""});
  }
  if (rank(s.theta) != static_cast<std::size_t>(d))
    out.push_back({"theta_invertible", {}, 1.0, "theta is singular"});
  return out;
}

}  // namespace grexp
