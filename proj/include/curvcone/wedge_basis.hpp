#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace curvcone {

/// Orthonormal wedge basis of so(n) = Lambda^2 R^n together with the
/// Lie-bracket structure constants.
///
/// Basis index alpha runs over vertex pairs (i, j), i < j, in lexicographic
/// order. The generator of the pair (i, j) is (E_ji - E_ij)/sqrt(2), which is
/// orthonormal under <A, B> = tr(A^T B); with this sign the n = 3 structure
/// constants are exactly eps_{abc}/sqrt(2).
///
/// Immutable after construction; safe to share across threads.
class WedgeBasis {
 public:
  static constexpr int kMinDim = 3;
  static constexpr int kMaxDim = 10;

  explicit WedgeBasis(int n) : n_(n) {
    if (n < kMinDim || n > kMaxDim)
      throw std::invalid_argument("WedgeBasis: n must be in [3, 10], got " +
                                  std::to_string(n));
    fiber_ = n * (n - 1) / 2;
    pairs_.reserve(fiber_);
    pair_to_index_.assign(n * n, -1);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        pair_to_index_[i * n + j] = static_cast<int>(pairs_.size());
        pairs_.emplace_back(i, j);
      }

    const double s = 1.0 / std::sqrt(2.0);
    generators_.reserve(fiber_);
    for (const auto& [i, j] : pairs_) {
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
      g(j, i) = s;
      g(i, j) = -s;
      generators_.push_back(std::move(g));
    }

    // c[a](b, c) = <[phi_b, phi_c], phi_a>, from matrix commutators.
    c_.assign(fiber_, Eigen::MatrixXd::Zero(fiber_, fiber_));
    for (int a = 0; a < fiber_; ++a)
      for (int b = a + 1; b < fiber_; ++b) {
        const Eigen::MatrixXd comm = generators_[a] * generators_[b] -
                                     generators_[b] * generators_[a];
        for (int g = 0; g < fiber_; ++g) {
          const double coef = (comm.transpose() * generators_[g]).trace();
          c_[g](a, b) = coef;
          c_[g](b, a) = -coef;
        }
      }
  }

  int n() const { return n_; }

  /// N = n(n-1)/2, the dimension of Lambda^2 R^n.
  int fiber_dim() const { return fiber_; }

  /// Basis index of the ordered pair (i, j), 0 <= i < j < n.
  int pair_index(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i >= j)
      throw std::out_of_range("WedgeBasis::pair_index: need 0 <= i < j < n");
    return pair_to_index_[i * n_ + j];
  }

  /// Vertex pair of basis index alpha.
  std::pair<int, int> index_pair(int alpha) const {
    check_index(alpha);
    return pairs_[alpha];
  }

  /// The antisymmetric n x n generator phi_alpha.
  const Eigen::MatrixXd& generator(int alpha) const {
    check_index(alpha);
    return generators_[alpha];
  }

  /// Structure constant c_gamma^{alpha beta} = <[phi_alpha, phi_beta], phi_gamma>.
  double c(int gamma, int alpha, int beta) const {
    check_index(gamma);
    check_index(alpha);
    check_index(beta);
    return c_[gamma](alpha, beta);
  }

  /// N x N table C_a with (C_a)(b, c) = c_a^{bc}; the workhorse of the sharp
  /// product contraction.
  const Eigen::MatrixXd& c_table(int a) const {
    check_index(a);
    return c_[a];
  }

  /// Coefficient vector of [phi_alpha, phi_beta] in the basis:
  /// component gamma is c_gamma^{alpha beta}.
  Eigen::VectorXd bracket(int alpha, int beta) const {
    check_index(alpha);
    check_index(beta);
    Eigen::VectorXd v(fiber_);
    for (int g = 0; g < fiber_; ++g) v(g) = c_[g](alpha, beta);
    return v;
  }

  /// Orthogonal map q on the fiber induced by conjugation with Q in O(n):
  /// q_{ab} = <phi_a, Q phi_b Q^T>.
  Eigen::MatrixXd induced_rotation(const Eigen::MatrixXd& Q) const {
    if (Q.rows() != n_ || Q.cols() != n_)
      throw std::invalid_argument("WedgeBasis::induced_rotation: Q must be n x n");
    Eigen::MatrixXd q(fiber_, fiber_);
    for (int b = 0; b < fiber_; ++b) {
      const Eigen::MatrixXd conj = Q * generators_[b] * Q.transpose();
      for (int a = 0; a < fiber_; ++a)
        q(a, b) = (generators_[a].transpose() * conj).trace();
    }
    return q;
  }

 private:
  void check_index(int alpha) const {
    if (alpha < 0 || alpha >= fiber_)
      throw std::out_of_range("WedgeBasis: basis index out of range");
  }

  int n_ = 0;
  int fiber_ = 0;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> pair_to_index_;
  std::vector<Eigen::MatrixXd> generators_;
  std::vector<Eigen::MatrixXd> c_;
};

}  // namespace curvcone
