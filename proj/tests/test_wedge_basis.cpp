#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <Eigen/Dense>

#include "curvcone/rng.hpp"
#include "curvcone/wedge_basis.hpp"

using curvcone::Rng;
using curvcone::WedgeBasis;

namespace {

int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
      (i == 2 && j == 0 && k == 1))
    return 1;
  return -1;
}

}  // namespace

TEST_CASE("basis construction and fiber dimension", "[wedge]") {
  CHECK(WedgeBasis(3).fiber_dim() == 3);
  CHECK(WedgeBasis(4).fiber_dim() == 6);
  CHECK(WedgeBasis(10).fiber_dim() == 45);
  CHECK_THROWS_AS(WedgeBasis(2), std::invalid_argument);
  CHECK_THROWS_AS(WedgeBasis(11), std::invalid_argument);
}

TEST_CASE("pair index map is a bijection", "[wedge]") {
  for (int n : {3, 4, 7}) {
    WedgeBasis basis(n);
    int count = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const int alpha = basis.pair_index(i, j);
        const auto [pi, pj] = basis.index_pair(alpha);
        CHECK(pi == i);
        CHECK(pj == j);
        ++count;
      }
    CHECK(count == basis.fiber_dim());
  }
  WedgeBasis b3(3);
  CHECK_THROWS_AS(b3.pair_index(1, 1), std::out_of_range);
  CHECK_THROWS_AS(b3.pair_index(2, 1), std::out_of_range);
  CHECK_THROWS_AS(b3.index_pair(3), std::out_of_range);
}

TEST_CASE("generators are orthonormal under the trace inner product", "[wedge]") {
  for (int n : {3, 4, 5}) {
    WedgeBasis basis(n);
    for (int a = 0; a < basis.fiber_dim(); ++a)
      for (int b = 0; b < basis.fiber_dim(); ++b) {
        const double ip =
            (basis.generator(a).transpose() * basis.generator(b)).trace();
        CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-12);
      }
  }
}

TEST_CASE("structure constants are antisymmetric in all three indices", "[wedge]") {
  for (int n : {3, 4, 5}) {
    WedgeBasis basis(n);
    const int fiber = basis.fiber_dim();
    double worst = 0.0;
    for (int g = 0; g < fiber; ++g)
      for (int a = 0; a < fiber; ++a)
        for (int b = 0; b < fiber; ++b) {
          worst = std::max(worst, std::abs(basis.c(g, a, b) + basis.c(g, b, a)));
          worst = std::max(worst, std::abs(basis.c(g, a, b) + basis.c(b, a, g)));
          worst = std::max(worst, std::abs(basis.c(g, a, b) + basis.c(a, g, b)));
        }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("structure constants satisfy the Jacobi identity", "[wedge]") {
  for (int n : {3, 4, 5}) {
    WedgeBasis basis(n);
    const int fiber = basis.fiber_dim();
    double worst = 0.0;
    for (int a = 0; a < fiber; ++a)
      for (int b = 0; b < fiber; ++b)
        for (int g = 0; g < fiber; ++g)
          for (int nu = 0; nu < fiber; ++nu) {
            double sum = 0.0;
            for (int m = 0; m < fiber; ++m)
              sum += basis.c(m, a, b) * basis.c(nu, m, g) +
                     basis.c(m, b, g) * basis.c(nu, m, a) +
                     basis.c(m, g, a) * basis.c(nu, m, b);
            worst = std::max(worst, std::abs(sum));
          }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("n = 3 constants equal the permutation symbol over sqrt(2)", "[wedge]") {
  WedgeBasis basis(3);
  const double s = 1.0 / std::sqrt(2.0);
  for (int g = 0; g < 3; ++g)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        CHECK(std::abs(basis.c(g, a, b) - levi_civita(a, b, g) * s) < 1e-12);
  // spot values quoted elsewhere: c_3^{12} = 1/sqrt(2) in 1-based labels
  CHECK(basis.c(2, 0, 1) == Catch::Approx(s).margin(1e-15));
}

TEST_CASE("bracket coefficients reconstruct the matrix commutator", "[wedge]") {
  for (int n : {3, 4, 5}) {
    WedgeBasis basis(n);
    const int fiber = basis.fiber_dim();
    for (int a = 0; a < fiber; ++a)
      for (int b = 0; b < fiber; ++b) {
        const Eigen::VectorXd coef = basis.bracket(a, b);
        Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(n, n);
        for (int g = 0; g < fiber; ++g) rebuilt += coef(g) * basis.generator(g);
        const Eigen::MatrixXd direct =
            basis.generator(a) * basis.generator(b) - basis.generator(b) * basis.generator(a);
        CHECK((rebuilt - direct).cwiseAbs().maxCoeff() < 1e-12);
      }
  }
}

TEST_CASE("bracket special values for n = 3", "[wedge]") {
  WedgeBasis basis(3);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(basis.bracket(0, 0).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd b01 = basis.bracket(0, 1);
  CHECK(b01(0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(b01(1) == Catch::Approx(0.0).margin(1e-15));
  CHECK(b01(2) == Catch::Approx(s).margin(1e-15));
  const Eigen::VectorXd b10 = basis.bracket(1, 0);
  CHECK(b10(2) == Catch::Approx(-s).margin(1e-15));
  CHECK_THROWS_AS(basis.bracket(0, 3), std::out_of_range);
}

TEST_CASE("induced rotations are orthogonal and respect composition", "[wedge]") {
  Rng rng(2024);
  for (int n : {3, 4}) {
    WedgeBasis basis(n);
    const int fiber = basis.fiber_dim();
    for (int rep = 0; rep < 5; ++rep) {
      const Eigen::MatrixXd Q1 = curvcone::haar_rotation(n, rng);
      const Eigen::MatrixXd Q2 = curvcone::haar_rotation(n, rng);
      const Eigen::MatrixXd q1 = basis.induced_rotation(Q1);
      const Eigen::MatrixXd q2 = basis.induced_rotation(Q2);
      CHECK((q1 * q1.transpose() - Eigen::MatrixXd::Identity(fiber, fiber))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
      const Eigen::MatrixXd q12 = basis.induced_rotation(Q1 * Q2);
      CHECK((q1 * q2 - q12).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}
