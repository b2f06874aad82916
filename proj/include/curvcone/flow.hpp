#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "curvcone/cones.hpp"
#include "curvcone/curvature_ops.hpp"
#include "curvcone/wedge_basis.hpp"

namespace curvcone {

/// Step guard: a step is halved until |rhs|_inf * dt <= kGrowthFraction *
/// (|R|_inf + 1). The right-hand side is quadratic, so this bounds the
/// relative growth per step and shrinks dt automatically toward blow-up.
inline constexpr double kGrowthFraction = 0.1;

struct IntegratorConfig {
  double dt0 = 1e-3;
  double t_max = 10.0;
  double norm_cap = 1e8;
  double step_shrink = 0.5;
  double min_dt = 1e-12;
  int record_stride = 10;
  bool store_operators = false;

  void validate() const {
    if (!(dt0 > 0)) throw std::invalid_argument("IntegratorConfig: dt0 > 0 required");
    if (!(t_max > 0)) throw std::invalid_argument("IntegratorConfig: t_max > 0 required");
    if (!(norm_cap > 1)) throw std::invalid_argument("IntegratorConfig: norm_cap > 1 required");
    if (!(step_shrink > 0 && step_shrink < 1))
      throw std::invalid_argument("IntegratorConfig: step_shrink in (0,1) required");
    if (!(min_dt > 0 && min_dt <= dt0))
      throw std::invalid_argument("IntegratorConfig: 0 < min_dt <= dt0 required");
    if (record_stride < 1)
      throw std::invalid_argument("IntegratorConfig: record_stride >= 1 required");
  }
};

enum class TerminalStatus { ReachedTMax, BlowUp, StepUnderflow };

inline const char* terminal_status_name(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::ReachedTMax: return "reached-t-max";
    case TerminalStatus::BlowUp: return "blow-up";
    case TerminalStatus::StepUnderflow: return "step-underflow";
  }
  return "?";
}

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd mu;       // ascending eigenvalues
  double c1_margin = std::numeric_limits<double>::quiet_NaN();
  double c2_margin = std::numeric_limits<double>::quiet_NaN();
  double norm_inf = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  std::vector<CurvatureOperator> operators;  // parallel to samples when stored
  TerminalStatus status = TerminalStatus::ReachedTMax;
  bool nonfinite_abort = false;  // overflow past the cap within one step
  double t_end = 0.0;
  long steps = 0;
};

inline Eigen::VectorXd sorted_eigenvalues(const CurvatureOperator& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("sorted_eigenvalues: eigensolver failed to converge");
  return solver.eigenvalues();
}

/// Integrates dR/dt = R^2 + R# with classical RK4: fixed stages, with the
/// growth guard above halving dt as needed. Terminates at t_max, at the norm
/// cap (blow-up), or when dt underflows min_dt. Eigenvalues and, when params
/// are given, C1/C2 margins are recorded at t = 0, every record_stride
/// accepted steps, and at termination.
inline TrajectoryRecord integrate(const CurvatureOperator& r0, const WedgeBasis& basis,
                                  const IntegratorConfig& cfg,
                                  std::optional<ConeParams> params = std::nullopt) {
  cfg.validate();
  if (r0.n() != basis.n())
    throw std::invalid_argument("integrate: operator/basis dimension mismatch");
  if (params) require_lambda_region(*params);

  TrajectoryRecord rec;
  CurvatureOperator r = r0;
  r.symmetrize();
  double t = 0.0;
  double dt = cfg.dt0;
  long step = 0;

  auto record = [&](const CurvatureOperator& state, double time) {
    if (!rec.samples.empty() && !(time > rec.samples.back().t)) return;
    TrajectorySample s;
    s.t = time;
    s.mu = sorted_eigenvalues(state);
    s.norm_inf = state.inf_norm();
    if (params) {
      s.c1_margin = c1_functional(s.mu, params->lambda1, params->lambda2, 0, 1, 2);
      s.c2_margin = c2_functional(s.mu, params->lambda1, params->lambda2, 0, 1);
    }
    rec.samples.push_back(std::move(s));
    if (cfg.store_operators) rec.operators.push_back(state);
  };

  record(r, 0.0);
  while (true) {
    if (cfg.t_max - t <= cfg.min_dt) {
      rec.status = TerminalStatus::ReachedTMax;
      break;
    }
    const CurvatureOperator k1 = ode_rhs(r, basis);
    bool underflow = false;
    while (dt * k1.inf_norm() > kGrowthFraction * (r.inf_norm() + 1.0)) {
      dt *= cfg.step_shrink;
      if (dt < cfg.min_dt) {
        underflow = true;
        break;
      }
    }
    if (underflow) {
      rec.status = TerminalStatus::StepUnderflow;
      break;
    }
    const double h = std::min(dt, cfg.t_max - t);
    const CurvatureOperator k2 = ode_rhs(r + (h / 2.0) * k1, basis);
    const CurvatureOperator k3 = ode_rhs(r + (h / 2.0) * k2, basis);
    const CurvatureOperator k4 = ode_rhs(r + h * k3, basis);
    Eigen::MatrixXd next = r.matrix() + (h / 6.0) * (k1.matrix() + 2.0 * k2.matrix() +
                                                     2.0 * k3.matrix() + k4.matrix());
    if (!next.allFinite()) {
      rec.status = TerminalStatus::BlowUp;
      rec.nonfinite_abort = true;
      break;
    }
    r = CurvatureOperator(basis.n(), std::move(next));
    t += h;
    ++step;
    if (r.inf_norm() >= cfg.norm_cap) {
      rec.status = TerminalStatus::BlowUp;
      break;
    }
    if (step % cfg.record_stride == 0) record(r, t);
  }
  record(r, t);
  rec.t_end = t;
  rec.steps = step;
  return rec;
}

/// Eigenvalue rates of the diagonal reduction:
/// rate_a = mu_a^2 + sum_{g<h} (c_a^{gh})^2 mu_g mu_h.
/// Diagonal operators stay diagonal under the flow in the wedge basis, so
/// this is an independent oracle for diagonal initial data.
inline Eigen::VectorXd diagonal_rhs(const Eigen::VectorXd& mu, const WedgeBasis& basis) {
  const int fiber = basis.fiber_dim();
  if (mu.size() != fiber)
    throw std::invalid_argument("diagonal_rhs: spectrum length must equal N");
  Eigen::VectorXd rate(fiber);
  for (int a = 0; a < fiber; ++a) {
    double cross = 0.0;
    const Eigen::MatrixXd& table = basis.c_table(a);
    for (int g = 0; g < fiber; ++g)
      for (int h = g + 1; h < fiber; ++h) {
        const double c = table(g, h);
        if (c != 0.0) cross += c * c * mu(g) * mu(h);
      }
    rate(a) = mu(a) * mu(a) + cross;
  }
  return rate;
}

/// Columnar trajectory dump: one row per recorded step with
/// t, mu_1..mu_N, C1 margin, C2 margin, |R|_inf (17 significant digits).
inline void write_trajectory(std::ostream& os, const TrajectoryRecord& rec, int fiber) {
  os << "# t";
  for (int a = 1; a <= fiber; ++a) os << " mu_" << a;
  os << " c1_margin c2_margin norm_inf\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    os << buf;
  };
  for (const auto& s : rec.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    os << buf;
    for (int a = 0; a < fiber; ++a) put(s.mu(a));
    put(s.c1_margin);
    put(s.c2_margin);
    put(s.norm_inf);
    os << "\n";
  }
  os << "# status " << terminal_status_name(rec.status)
     << (rec.nonfinite_abort ? " (non-finite step discarded)" : "") << "\n";
}

}  // namespace curvcone
