#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvcone/curvature_ops.hpp"

namespace curvcone {

/// Parameter pair (lambda1, lambda2) of the interpolating cone family.
struct ConeParams {
  double lambda1 = 1.0;
  double lambda2 = 0.0;

  /// Weight of the second eigenvalue in the C2 functional.
  double c2_weight() const { return 1.0 - (lambda1 + lambda2) * lambda2; }
};

/// Critical lambda2 for a fixed lambda1: the root of y^2 + x y = 1, where the
/// C2 functional loses its mu_2 term and the cone degenerates to the
/// nonnegative cone. Rounded up to the first double that violates the strict
/// constraint 0 < 1 - (x+y)y, so the returned value itself is always excluded
/// from the region.
inline double critical_lambda2(double lambda1) {
  double y = (std::sqrt(lambda1 * lambda1 + 4.0) - lambda1) / 2.0;
  while (1.0 - (lambda1 + y) * y > 0.0)
    y = std::nextafter(y, std::numeric_limits<double>::infinity());
  return y;
}

/// Name of the first violated defining inequality of the parameter region,
/// or empty when (lambda1, lambda2) is a member. The positivity constraint
/// 0 < 1 - (lambda1+lambda2)*lambda2 is strict; the rest are closed.
inline std::string lambda_region_violation(double lambda1, double lambda2) {
  if (!(std::isfinite(lambda1) && std::isfinite(lambda2)))
    return "lambda1, lambda2 must be finite";
  if (!(0.0 <= lambda2)) return "0 <= lambda2 violated";
  if (!(lambda2 <= lambda1)) return "lambda2 <= lambda1 violated";
  if (!(lambda1 <= 1.0)) return "lambda1 <= 1 violated";
  const double w = 1.0 - (lambda1 + lambda2) * lambda2;
  if (!(0.0 < w)) return "0 < 1 - (lambda1+lambda2)*lambda2 violated";
  if (!(w <= lambda1)) return "1 - (lambda1+lambda2)*lambda2 <= lambda1 violated";
  return {};
}

inline bool lambda_region_contains(double lambda1, double lambda2) {
  return lambda_region_violation(lambda1, lambda2).empty();
}

inline void require_lambda_region(const ConeParams& p) {
  const std::string why = lambda_region_violation(p.lambda1, p.lambda2);
  if (!why.empty())
    throw std::invalid_argument("cone params outside the parameter region: " + why);
}

/// C1 functional mu_a + lambda1 mu_b + lambda2 mu_c over ascending
/// eigenvalues; indices are 0-based and must satisfy a < b < c.
inline double c1_functional(const Eigen::VectorXd& mu, double lambda1, double lambda2,
                            int a, int b, int c) {
  if (!(0 <= a && a < b && b < c && c < mu.size()))
    throw std::invalid_argument("c1_functional: need 0 <= a < b < c < N");
  return mu(a) + lambda1 * mu(b) + lambda2 * mu(c);
}

/// C2 functional lambda1 mu_a + (1 - (lambda1+lambda2) lambda2) mu_b,
/// 0-based indices a < b.
inline double c2_functional(const Eigen::VectorXd& mu, double lambda1, double lambda2,
                            int a, int b) {
  if (!(0 <= a && a < b && b < mu.size()))
    throw std::invalid_argument("c2_functional: need 0 <= a < b < N");
  return lambda1 * mu(a) + (1.0 - (lambda1 + lambda2) * lambda2) * mu(b);
}

enum class Binding { C1, C2 };

inline const char* binding_name(Binding b) { return b == Binding::C1 ? "C1" : "C2"; }

/// Membership verdict for one cone: the margin is the minimum constraint
/// value over all index combinations, and `binding` names the functional
/// attaining it.
struct ConeVerdict {
  bool member = false;
  double margin = 0.0;
  Binding binding = Binding::C1;
};

inline double spectrum_inf_norm(const Eigen::VectorXd& mu) {
  return mu.size() == 0 ? 0.0 : mu.cwiseAbs().maxCoeff();
}

/// Cone membership for a sorted spectrum. Because the eigenvalues ascend and
/// all functional weights are nonnegative inside the parameter region, the
/// minimum over triples of C1 is attained at (0,1,2) and the minimum over
/// pairs of C2 at (0,1); membership is decided by those two values alone.
/// Weak mode accepts margin >= -tol_eff, strict mode demands margin > tol_eff,
/// with tol_eff = tol * max(1, |mu|_inf).
inline ConeVerdict cone_contains(const Eigen::VectorXd& mu, const ConeParams& params,
                                 bool strict = false, double tol = 1e-9) {
  require_lambda_region(params);
  if (mu.size() < 3)
    throw std::invalid_argument("cone_contains: need at least 3 eigenvalues");
  const double v1 = c1_functional(mu, params.lambda1, params.lambda2, 0, 1, 2);
  const double v2 = c2_functional(mu, params.lambda1, params.lambda2, 0, 1);
  ConeVerdict verdict;
  if (v1 <= v2) {
    verdict.margin = v1;
    verdict.binding = Binding::C1;
  } else {
    verdict.margin = v2;
    verdict.binding = Binding::C2;
  }
  const double tol_eff = scaled_tol(tol, spectrum_inf_norm(mu));
  verdict.member = strict ? (verdict.margin > tol_eff) : (verdict.margin >= -tol_eff);
  return verdict;
}

inline ConeVerdict cone_contains(const EigenData& eig, const ConeParams& params,
                                 bool strict = false, double tol = 1e-9) {
  return cone_contains(eig.values, params, strict, tol);
}

inline ConeVerdict cone_contains(const CurvatureOperator& r, const ConeParams& params,
                                 bool strict = false, double tol = 1e-9) {
  return cone_contains(eigen_sorted(r).values, params, strict, tol);
}

/// 2-nonnegativity: mu_1 + mu_2 >= 0 (ascending input decides via the two
/// smallest eigenvalues).
inline bool two_nonneg_contains(const Eigen::VectorXd& mu, double tol = 1e-9) {
  if (mu.size() < 2)
    throw std::invalid_argument("two_nonneg_contains: need at least 2 eigenvalues");
  return mu(0) + mu(1) >= -scaled_tol(tol, spectrum_inf_norm(mu));
}

inline bool two_pos_contains(const Eigen::VectorXd& mu, double tol = 1e-9) {
  if (mu.size() < 2)
    throw std::invalid_argument("two_pos_contains: need at least 2 eigenvalues");
  return mu(0) + mu(1) > scaled_tol(tol, spectrum_inf_norm(mu));
}

inline bool nonneg_contains(const Eigen::VectorXd& mu, double tol = 1e-9) {
  if (mu.size() < 1)
    throw std::invalid_argument("nonneg_contains: need at least 1 eigenvalue");
  return mu(0) >= -scaled_tol(tol, spectrum_inf_norm(mu));
}

/// Finite sample of the parameter region used by the set-identity checks.
struct LambdaGrid {
  std::vector<ConeParams> points;

  bool has_corner() const {
    for (const auto& p : points)
      if (std::abs(p.lambda1 - 1.0) < 1e-12 && std::abs(p.lambda2) < 1e-12) return true;
    return false;
  }

  /// cols x rows lattice over the bounding box [1/2, 1] x [0, y_max]
  /// intersected with the region, augmented with `near_per_col` points within
  /// 1e-6 below the critical lambda2 on every column where those lie in the
  /// region. Always includes (1, 0).
  static LambdaGrid standard(int cols = 50, int rows = 50, int near_per_col = 20) {
    if (cols < 2 || rows < 2) throw std::invalid_argument("LambdaGrid: need >= 2x2");
    LambdaGrid grid;
    const double x_lo = 0.5, x_hi = 1.0;
    const double y_hi = critical_lambda2(x_lo);
    for (int ci = 0; ci < cols; ++ci) {
      const double x = x_lo + (x_hi - x_lo) * ci / (cols - 1);
      for (int ri = 0; ri < rows; ++ri) {
        const double y = y_hi * ri / (rows - 1);
        if (lambda_region_contains(x, y)) grid.points.push_back({x, y});
      }
      const double yc = critical_lambda2(x);
      for (int k = 1; k <= near_per_col; ++k) {
        const double y = yc - 1e-6 * k / near_per_col;
        if (lambda_region_contains(x, y)) grid.points.push_back({x, y});
      }
    }
    if (!grid.has_corner()) grid.points.push_back({1.0, 0.0});
    return grid;
  }
};

/// Outcome of one set-identity comparison.
struct IdentityCheck {
  bool sampled_member = false;   // decision over the grid
  bool analytic_member = false;  // decision of the closed-form set
  bool agree = false;            // sampled == analytic
  bool within_band = false;      // disagreement explained by grid resolution
  bool counterexample = false;   // disagreement the identity cannot explain
};

/// Intersection identity: membership in every cone of the family vs the
/// nonnegative cone. Two disagreement classes are within-band rather than
/// counterexamples:
///  - tolerance indeterminacy: |mu_1| <= 10 tol_eff, where the two sides'
///    tolerance-padded decisions can legitimately straddle the exact boundary;
///  - grid resolution: the finite grid over-accepts a slightly negative mu_1
///    whose rejection needs parameters closer to the critical curve than the
///    grid reaches, bounded by rho * max(mu_2, 0) + 10 tol_eff with
///    rho = min over the grid of (1-(l1+l2)l2)/l1.
inline IdentityCheck check_intersection_identity(const Eigen::VectorXd& mu,
                                                 const LambdaGrid& grid,
                                                 double tol = 1e-9) {
  if (grid.points.empty())
    throw std::invalid_argument("check_intersection_identity: empty grid");
  IdentityCheck out;
  out.sampled_member = true;
  double rho = std::numeric_limits<double>::infinity();
  for (const auto& p : grid.points) {
    rho = std::min(rho, p.c2_weight() / p.lambda1);
    if (!cone_contains(mu, p, false, tol).member) {
      out.sampled_member = false;
      break;
    }
  }
  out.analytic_member = nonneg_contains(mu, tol);
  out.agree = out.sampled_member == out.analytic_member;
  if (!out.agree) {
    const double tol_eff = scaled_tol(tol, spectrum_inf_norm(mu));
    if (std::abs(mu(0)) <= 10.0 * tol_eff) out.within_band = true;
    else if (out.sampled_member && !out.analytic_member)
      out.within_band = -mu(0) <= rho * std::max(mu(1), 0.0) + 10.0 * tol_eff;
    out.counterexample = !out.within_band;
  }
  return out;
}

/// Union identity: membership in some cone of the family vs 2-nonnegativity
/// (or the strict versions of both). The union reduces exactly to membership
/// at (1, 0), where both functionals collapse to mu_1 + mu_2; the check also
/// verifies the nesting that no grid point accepts a spectrum (1, 0) rejects.
/// Disagreements with |mu_1 + mu_2| <= 10 tol_eff are tolerance
/// indeterminacy (within-band), not counterexamples.
inline IdentityCheck check_union_identity(const Eigen::VectorXd& mu, const LambdaGrid& grid,
                                          bool strict = false, double tol = 1e-9) {
  if (grid.points.empty())
    throw std::invalid_argument("check_union_identity: empty grid");
  if (!grid.has_corner())
    throw std::invalid_argument("check_union_identity: grid must contain (1, 0)");
  IdentityCheck out;
  const ConeParams corner{1.0, 0.0};
  const bool corner_member = cone_contains(mu, corner, strict, tol).member;
  bool nesting_broken = false;
  out.sampled_member = false;
  for (const auto& p : grid.points) {
    const bool m = cone_contains(mu, p, strict, tol).member;
    out.sampled_member = out.sampled_member || m;
    if (m && !corner_member) nesting_broken = true;
  }
  out.analytic_member =
      strict ? two_pos_contains(mu, tol) : two_nonneg_contains(mu, tol);
  out.agree = out.sampled_member == out.analytic_member && !nesting_broken;
  if (!out.agree) {
    const double tol_eff = scaled_tol(tol, spectrum_inf_norm(mu));
    out.within_band = std::abs(mu(0) + mu(1)) <= 10.0 * tol_eff;
    out.counterexample = !out.within_band;
  }
  return out;
}

}  // namespace curvcone
