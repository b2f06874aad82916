#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "curvcone/wedge_basis.hpp"

namespace curvcone {

/// Relative/absolute tolerance switch used throughout: absolute while the
/// operator norm stays <= 1, relative once trajectories grow.
inline double scaled_tol(double tol, double norm) {
  return tol * std::max(1.0, norm);
}

/// Symmetric bilinear form on Lambda^2 R^n, stored as a symmetric N x N
/// matrix in the wedge basis. Construction symmetrizes; grossly asymmetric
/// input is rejected.
class CurvatureOperator {
 public:
  CurvatureOperator() = default;

  CurvatureOperator(int n, Eigen::MatrixXd entries) : n_(n), m_(std::move(entries)) {
    const int fiber = n * (n - 1) / 2;
    if (m_.rows() != fiber || m_.cols() != fiber)
      throw std::invalid_argument(
          "CurvatureOperator: matrix must be N x N with N = n(n-1)/2");
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (asym > scaled_tol(1e-6, inf_norm()))
      throw std::invalid_argument("CurvatureOperator: input is not symmetric");
    symmetrize();
  }

  static CurvatureOperator Zero(int n) {
    const int fiber = n * (n - 1) / 2;
    return CurvatureOperator(n, Eigen::MatrixXd::Zero(fiber, fiber));
  }

  static CurvatureOperator Identity(int n) {
    const int fiber = n * (n - 1) / 2;
    return CurvatureOperator(n, Eigen::MatrixXd::Identity(fiber, fiber));
  }

  int n() const { return n_; }
  int fiber_dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(int a, int b) const { return m_(a, b); }

  double inf_norm() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

  void symmetrize() { m_ = ((m_ + m_.transpose()) / 2.0).eval(); }

  CurvatureOperator& operator+=(const CurvatureOperator& o) {
    m_ += o.m_;
    return *this;
  }

  CurvatureOperator& operator*=(double s) {
    m_ *= s;
    return *this;
  }

 private:
  int n_ = 0;
  Eigen::MatrixXd m_;
};

inline CurvatureOperator operator*(double s, const CurvatureOperator& r) {
  return CurvatureOperator(r.n(), s * r.matrix());
}

inline CurvatureOperator operator+(const CurvatureOperator& a, const CurvatureOperator& b) {
  return CurvatureOperator(a.n(), a.matrix() + b.matrix());
}

/// Ascending eigenvalues with a matched orthonormal eigenvector column per
/// value. No uniqueness promise for repeated eigenvalues.
struct EigenData {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

namespace detail {
inline void require_same_space(const CurvatureOperator& a, const CurvatureOperator& b,
                               const WedgeBasis& basis) {
  if (a.n() != basis.n() || b.n() != basis.n())
    throw std::invalid_argument("curvature ops: operator/basis dimension mismatch");
}
}  // namespace detail

/// Sharp product (A#B)_{ab} = 1/2 c_a^{gh} c_b^{de} A_{gd} B_{he}, evaluated
/// as 1/2 <C_a, A C_b B> with the structure-constant tables C_a. Commutative
/// and symmetric for symmetric inputs.
inline CurvatureOperator sharp(const CurvatureOperator& a, const CurvatureOperator& b,
                               const WedgeBasis& basis) {
  detail::require_same_space(a, b, basis);
  const int fiber = basis.fiber_dim();
  const Eigen::MatrixXd& am = a.matrix();
  const Eigen::MatrixXd& bm = b.matrix();
  Eigen::MatrixXd out(fiber, fiber);
  for (int beta = 0; beta < fiber; ++beta) {
    const Eigen::MatrixXd mid = am * basis.c_table(beta) * bm.transpose();
    for (int alpha = 0; alpha < fiber; ++alpha)
      out(alpha, beta) = 0.5 * basis.c_table(alpha).cwiseProduct(mid).sum();
  }
  return CurvatureOperator(basis.n(), std::move(out));
}

inline CurvatureOperator sharp_self(const CurvatureOperator& a, const WedgeBasis& basis) {
  return sharp(a, a, basis);
}

/// Right-hand side of Hamilton's curvature ODE dR/dt = R^2 + R#.
inline CurvatureOperator ode_rhs(const CurvatureOperator& r, const WedgeBasis& basis) {
  detail::require_same_space(r, r, basis);
  CurvatureOperator sq(basis.n(), (r.matrix() * r.matrix()).eval());
  sq += sharp_self(r, basis);
  sq.symmetrize();
  return sq;
}

/// Ascending eigendecomposition.
inline EigenData eigen_sorted(const CurvatureOperator& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r.matrix());
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigen_sorted: eigensolver failed to converge");
  return EigenData{solver.eigenvalues(), solver.eigenvectors()};
}

/// Component <Rm(e_i, e_j) e_l, e_k> of the curvature tensor determined by R
/// under the factor-2 convention R(X^Y, Z^W) = 2 <Rm(X,Y) W, Z>: the wedge
/// e_i ^ e_j expands to +/- the unit basis 2-form (zero when i = j), so the
/// value is sign/2 times a matrix entry of R. Vertex indices are 0-based.
inline double curvature_tensor_entry(const CurvatureOperator& r, const WedgeBasis& basis,
                                     int i, int j, int k, int l) {
  if (r.n() != basis.n())
    throw std::invalid_argument("curvature_tensor_entry: operator/basis mismatch");
  const int n = basis.n();
  for (int v : {i, j, k, l})
    if (v < 0 || v >= n)
      throw std::out_of_range("curvature_tensor_entry: vertex index out of range");
  if (i == j || k == l) return 0.0;
  double sign = 1.0;
  if (i > j) {
    std::swap(i, j);
    sign = -sign;
  }
  if (k > l) {
    std::swap(k, l);
    sign = -sign;
  }
  return 0.5 * sign * r(basis.pair_index(i, j), basis.pair_index(k, l));
}

/// Scalar curvature Scal = sum_{i,j} R(e_i^e_j, e_i^e_j), assembled from
/// curvature tensor entries; equals 2 tr(R).
inline double scalar_curvature(const CurvatureOperator& r, const WedgeBasis& basis) {
  const int n = basis.n();
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      total += 2.0 * curvature_tensor_entry(r, basis, i, j, i, j);
  return total;
}

}  // namespace curvcone
