#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/QR>

namespace curvcone {

/// Deterministic 64-bit generator (splitmix64) with a Box-Muller normal
/// sampler. Used instead of std::mt19937 + std::normal_distribution because
/// the standard distributions are implementation-defined and report bytes
/// must be reproducible from (config, seed) alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal deviate.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

/// Gaussian matrix with a fixed (column-major) fill order.
inline Eigen::MatrixXd gaussian_matrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = rng.gaussian();
  return g;
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// R-diagonal sign fix.
inline Eigen::MatrixXd haar_orthogonal(int dim, Rng& rng) {
  const Eigen::MatrixXd g = gaussian_matrix(dim, dim, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (int j = 0; j < dim; ++j)
    if (diag(j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

/// Haar-distributed rotation (determinant +1).
inline Eigen::MatrixXd haar_rotation(int dim, Rng& rng) {
  Eigen::MatrixXd q = haar_orthogonal(dim, rng);
  if (q.determinant() < 0.0) q.col(dim - 1) = -q.col(dim - 1);
  return q;
}

}  // namespace curvcone
