#pragma once

#include <grexp/lie_core.hpp>
#include <grexp/matrix.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>
#include <string>
#include <vector>

namespace grexp {

inline Eigen::MatrixXd to_eigen(const Matrix<double>& m) {
  Eigen::MatrixXd r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m(i, j);
  return r;
}

inline Eigen::VectorXd to_eigen(const Vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vector<double> from_eigen(const Eigen::VectorXd& v) { return Vector<double>(v.data(), v.data() + v.size()); }

inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a) { return a.exp(); }

/// Principal logarithm, guarded to a neighbourhood of the identity
/// (operator 2-norm of M - I).
inline Eigen::MatrixXd logm(const Eigen::MatrixXd& a, double guard = 0.5) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const double dist = Eigen::JacobiSVD<Eigen::MatrixXd>(a - id).singularValues()(0);
  if (!(dist < guard))
    throw std::domain_error("matrix logarithm outside its guarded domain (|M - I| = " + std::to_string(dist) + ")");
  return a.log();
}

/// Coordinates of elements of g in a faithful matrix representation.
class MatrixCoordinates {
 public:
  explicit MatrixCoordinates(const LieAlgebra& g) {
    if (!g.matrix_rep()) throw std::invalid_argument("algebra " + g.name() + " has no matrix representation");
    rep_ = *g.matrix_rep();
    const auto rows = rep_.front().size();
    basis_.resize(rows, static_cast<Eigen::Index>(rep_.size()));
    for (std::size_t i = 0; i < rep_.size(); ++i)
      basis_.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(rep_[i].data(), rows);
    qr_ = basis_.colPivHouseholderQr();
    if (qr_.rank() != static_cast<Eigen::Index>(rep_.size()))
      throw std::invalid_argument("matrix representation of " + g.name() + " is not faithful");
  }

  Eigen::MatrixXd to_matrix(const Vector<double>& x) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rep_.front().rows(), rep_.front().cols());
    for (std::size_t i = 0; i < rep_.size(); ++i) m += x.at(i) * rep_[i];
    return m;
  }

  /// Least-squares pullback; throws if the matrix is not in the span.
  Vector<double> coordinates(const Eigen::MatrixXd& m, double tol = 1e-9) const {
    const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    const Eigen::VectorXd c = qr_.solve(flat);
    const double off = (basis_ * c - flat).norm();
    if (off > tol * std::max(1.0, flat.norm()))
      throw std::domain_error("matrix is not in the span of the representation (residual " + std::to_string(off) + ")");
    return from_eigen(c);
  }

 private:
  std::vector<Eigen::MatrixXd> rep_;
  Eigen::MatrixXd basis_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

}  // namespace grexp
