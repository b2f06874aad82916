#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "curvcone/cones.hpp"
#include "curvcone/curvature_ops.hpp"
#include "curvcone/flow.hpp"
#include "curvcone/models.hpp"
#include "curvcone/reporting.hpp"
#include "curvcone/rng.hpp"
#include "curvcone/wedge_basis.hpp"

namespace curvcone {

// ---------------------------------------------------------------------------
// Deterministic parallel map: task i writes only slot i, so results are a
// pure function of (config, seed) regardless of the worker count.
// ---------------------------------------------------------------------------

template <typename Fn>
inline void parallel_for(long count, int workers, Fn&& fn) {
  if (count <= 0) return;
  long w = workers > 0 ? workers : static_cast<long>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  w = std::min(w, count);
  if (w == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    while (true) {
      const long i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (long t = 0; t < w; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Uniform draw from the parameter region (rejection from its bounding box,
/// keeping 1e-9 clear of the degenerate critical edge).
inline ConeParams sample_lambda_region(Rng& rng) {
  const double y_hi = critical_lambda2(0.5);
  while (true) {
    const double x = 0.5 + 0.5 * rng.uniform01();
    const double y = y_hi * rng.uniform01();
    if (!lambda_region_contains(x, y)) continue;
    if ((x + y) * y > 1.0 - 1e-9) continue;
    return ConeParams{x, y};
  }
}

inline std::string dims_string(const std::vector<int>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s;
}

inline std::string params_string(const ConeParams& p) {
  return fmt_g17(p.lambda1) + "," + fmt_g17(p.lambda2);
}

namespace detail {

inline std::vector<WedgeBasis> build_bases(const std::vector<int>& dims) {
  std::vector<WedgeBasis> bases;
  bases.reserve(dims.size());
  for (int n : dims) bases.emplace_back(n);
  return bases;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Invariance experiment: cone membership is preserved along dR/dt = R^2 + R#.
// ---------------------------------------------------------------------------

struct InvarianceConfig {
  std::vector<int> dims{3, 4};
  std::optional<ConeParams> params;  // absent: fresh random params per trial
  long trials = 1000;
  std::uint64_t seed = 1;
  IntegratorConfig integrator{.t_max = 3.0};
  double tol_rel = 1e-7;
  int workers = 0;
};

/// Deterministic setup of invariance trial i: the dimension cycles through
/// dims, interior and boundary starts alternate independently of that cycle,
/// and the sampler seed derives from (seed, i). Shared with the trajectory
/// exporter so that exported files replay the experiment's exact draws.
struct InvarianceTrialSetup {
  int n;
  ConeParams params;
  std::optional<Binding> boundary;
  std::uint64_t sampler_seed;
};

inline InvarianceTrialSetup invariance_trial_setup(const InvarianceConfig& cfg, long i) {
  InvarianceTrialSetup s{};
  s.n = cfg.dims[static_cast<std::size_t>(i) % cfg.dims.size()];
  Rng rng(cfg.seed + static_cast<std::uint64_t>(i));
  s.params = cfg.params ? *cfg.params : sample_lambda_region(rng);
  s.sampler_seed = rng.next_u64();
  if ((i / static_cast<long>(cfg.dims.size())) % 2 == 1) s.boundary = Binding::C2;
  return s;
}

namespace detail {

/// Fixed-step RK4 over [t0, t1]; the re-integration used to confirm that a
/// margin violation is not an artifact of the step size.
inline CurvatureOperator rk4_span(CurvatureOperator r, const WedgeBasis& basis,
                                  double t0, double t1, int nsteps) {
  const double h = (t1 - t0) / nsteps;
  for (int s = 0; s < nsteps; ++s) {
    const CurvatureOperator k1 = ode_rhs(r, basis);
    const CurvatureOperator k2 = ode_rhs(r + (h / 2.0) * k1, basis);
    const CurvatureOperator k3 = ode_rhs(r + (h / 2.0) * k2, basis);
    const CurvatureOperator k4 = ode_rhs(r + h * k3, basis);
    r = CurvatureOperator(basis.n(),
                          r.matrix() + (h / 6.0) * (k1.matrix() + 2.0 * k2.matrix() +
                                                    2.0 * k3.matrix() + k4.matrix()));
  }
  return r;
}

struct InvarianceTrial {
  int n = 0;
  ConeParams params;
  TerminalStatus status = TerminalStatus::ReachedTMax;
  bool skipped = false;
  std::string skip_reason;
  double min_norm_margin = 0.0;  // min over records of margin / max(1, |R|)
  int transient_violations = 0;  // failed the persistence confirmation
  std::optional<Violation> violation;
};

}  // namespace detail

/// Draws `trials` in-cone operators (even ids interior, odd ids on the C2
/// boundary facet, which is the samplable facet everywhere in the region),
/// integrates each, and checks the recorded C1/C2 margins at relative
/// tolerance tol_rel. A violation counts only if it persists for >= 3
/// consecutive recorded steps and survives re-integration of the offending
/// record interval at a quarter of the original step.
inline ExperimentReport invariance_experiment(const InvarianceConfig& cfg) {
  detail::Stopwatch watch;
  IntegratorConfig integ = cfg.integrator;
  integ.validate();
  integ.store_operators = true;
  const auto bases = detail::build_bases(cfg.dims);

  std::vector<detail::InvarianceTrial> results(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, cfg.workers, [&](long i) {
    detail::InvarianceTrial& out = results[static_cast<std::size_t>(i)];
    const std::size_t which_dim = static_cast<std::size_t>(i) % cfg.dims.size();
    const WedgeBasis& basis = bases[which_dim];
    const InvarianceTrialSetup setup = invariance_trial_setup(cfg, i);
    out.n = setup.n;
    out.params = setup.params;

    InConeDraw draw;
    try {
      draw = random_in_cone(out.params, out.n, setup.sampler_seed, setup.boundary);
    } catch (const std::runtime_error& e) {
      out.skipped = true;
      out.skip_reason = e.what();
      return;
    }

    const TrajectoryRecord traj = integrate(draw.op, basis, integ, out.params);
    out.status = traj.status;

    const auto tol_at = [&](std::size_t k) {
      return scaled_tol(cfg.tol_rel, traj.samples[k].norm_inf);
    };
    const auto margin_at = [&](std::size_t k) {
      return std::min(traj.samples[k].c1_margin, traj.samples[k].c2_margin);
    };

    out.min_norm_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.samples.size(); ++k)
      out.min_norm_margin = std::min(
          out.min_norm_margin, margin_at(k) / std::max(1.0, traj.samples[k].norm_inf));

    std::size_t run_start = 0, run_len = 0;
    for (std::size_t k = 0; k <= traj.samples.size(); ++k) {
      const bool bad = k < traj.samples.size() && margin_at(k) < -tol_at(k);
      if (bad) {
        if (run_len == 0) run_start = k;
        ++run_len;
        continue;
      }
      if (run_len >= 3) {
        bool confirmed = true;
        if (run_start > 0) {
          const auto& prev = traj.samples[run_start - 1];
          const auto& cur = traj.samples[run_start];
          const CurvatureOperator refined =
              detail::rk4_span(traj.operators[run_start - 1], basis, prev.t, cur.t,
                               4 * integ.record_stride);
          const Eigen::VectorXd mu = sorted_eigenvalues(refined);
          const double margin =
              std::min(c1_functional(mu, out.params.lambda1, out.params.lambda2, 0, 1, 2),
                       c2_functional(mu, out.params.lambda1, out.params.lambda2, 0, 1));
          confirmed = margin < -scaled_tol(cfg.tol_rel, refined.inf_norm());
        }
        if (confirmed && !out.violation) {
          const auto& s = traj.samples[run_start];
          Violation v;
          v.sample_id = i;
          v.time = s.t;
          v.margin = margin_at(run_start);
          v.magnitude = -margin_at(run_start) / std::max(1.0, s.norm_inf);
          v.note = std::string("cone exit, n=") + std::to_string(out.n) +
                   " params=" + params_string(out.params) +
                   (setup.boundary ? " boundary" : " interior");
          out.violation = v;
        } else if (!confirmed) {
          ++out.transient_violations;
        }
      }
      run_len = 0;
    }
  });

  ExperimentReport report;
  report.experiment = "invariance";
  report.seed = cfg.seed;
  report.config.emplace_back("dims", dims_string(cfg.dims));
  report.config.emplace_back("params", cfg.params ? params_string(*cfg.params) : "random");
  report.config.emplace_back("trials", std::to_string(cfg.trials));
  report.config.emplace_back("tol_rel", fmt_g17(cfg.tol_rel));
  report.config.emplace_back("dt0", fmt_g17(integ.dt0));
  report.config.emplace_back("t_max", fmt_g17(integ.t_max));
  report.config.emplace_back("norm_cap", fmt_g17(integ.norm_cap));
  report.config.emplace_back("record_stride", std::to_string(integ.record_stride));

  for (std::size_t d = 0; d < cfg.dims.size(); ++d) {
    long trials = 0, blowups = 0, tmax = 0, underflow = 0, skipped = 0, transients = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (long i = 0; i < cfg.trials; ++i) {
      const auto& r = results[static_cast<std::size_t>(i)];
      if (static_cast<std::size_t>(i) % cfg.dims.size() != d) continue;
      ++trials;
      if (r.skipped) {
        ++skipped;
        continue;
      }
      switch (r.status) {
        case TerminalStatus::BlowUp: ++blowups; break;
        case TerminalStatus::ReachedTMax: ++tmax; break;
        case TerminalStatus::StepUnderflow: ++underflow; break;
      }
      transients += r.transient_violations;
      min_margin = std::min(min_margin, r.min_norm_margin);
    }
    ReportCell cell;
    cell.label = "n=" + std::to_string(cfg.dims[d]);
    cell.add("trials", trials);
    cell.add("skipped", skipped);
    cell.add("blow_up", blowups);
    cell.add("reached_t_max", tmax);
    cell.add("step_underflow", underflow);
    cell.add("transient_violations", transients);
    cell.add("min_normalized_margin", trials > skipped ? min_margin : 0.0);
    report.cells.push_back(std::move(cell));
    report.skipped_total += skipped;
  }
  report.samples_total = cfg.trials;
  for (const auto& r : results)
    if (r.violation) report.violations.push_back(*r.violation);
  report.wall_seconds = watch.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// Tangent-cone experiment: at boundary points of the cone the vector field
// R^2 + R# does not point outward.
// ---------------------------------------------------------------------------

/// Edge x edge parameter lattice spanning the region (columns over lambda1,
/// rows between the lower edge lambda1+lambda2 = 1 and just inside the
/// critical curve). Contains the corner (1, 0).
inline std::vector<ConeParams> tangent_grid(int edge = 5) {
  if (edge < 2) throw std::invalid_argument("tangent_grid: edge >= 2");
  std::vector<ConeParams> pts;
  for (int i = 0; i < edge; ++i) {
    const double x = 0.5 + 0.5 * i / (edge - 1);
    const double y_lo = std::max(0.0, 1.0 - x);
    const double y_hi = std::min(x, critical_lambda2(x) - 1e-3);
    for (int j = 0; j < edge; ++j) {
      const double y = y_lo + (y_hi - y_lo) * j / (edge - 1);
      if (!lambda_region_contains(x, y)) continue;
      if (!pts.empty() && std::abs(pts.back().lambda1 - x) < 1e-15 &&
          std::abs(pts.back().lambda2 - y) < 1e-15)
        continue;
      pts.push_back({x, y});
    }
  }
  return pts;
}

struct TangentConeConfig {
  std::vector<int> dims{3, 4, 5};
  std::vector<ConeParams> grid = tangent_grid();
  long samples_per_type = 1000;  // per (facet, n), spread over feasible cells
  std::vector<Binding> facets{Binding::C1, Binding::C2};
  std::uint64_t seed = 1;
  double tol = 1e-8;
  double gap_min = 1e-6;
  double max_skip_rate = 0.05;
  int workers = 0;
};

namespace detail {

struct TangentTask {
  Binding which;
  int dim_index;
  int cell_index;   // into cfg.grid
  long global_id;   // seeds and violation sample ids
};

struct TangentOutcome {
  bool evaluated = false;
  bool skipped_degenerate = false;
  bool sampler_exhausted = false;
  double weighted = 0.0;
  double normalized = 0.0;
  std::array<double, 5> groups{};
  double residual = 0.0;
  std::optional<Violation> violation;
};

/// Structure-constant tables in the eigenframe V for output indices 0..2:
/// ct_g = V^T (sum_r V(r,g) C_r) V.
inline std::array<Eigen::MatrixXd, 3> frame_structure_tables(const WedgeBasis& basis,
                                                             const Eigen::MatrixXd& V) {
  const int fiber = basis.fiber_dim();
  std::array<Eigen::MatrixXd, 3> out;
  for (int g = 0; g < 3; ++g) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(fiber, fiber);
    for (int r = 0; r < fiber; ++r) {
      const double w = V(r, g);
      if (w != 0.0) m += w * basis.c_table(r);
    }
    out[g] = V.transpose() * m * V;
  }
  return out;
}

}  // namespace detail

/// Boundary operators are drawn on the requested facet (binding functional
/// zero, the other >= 0, mu_1 <= 0 <= mu_2); samples whose relevant
/// eigenvalue gaps fall under gap_min are skipped, since the derivative
/// argument needs simple eigenvalues. For each sample the weighted quadratic
/// form of D = R^2 + R# on the stored eigenvectors must be
/// >= -tol * max(1, |R|^2). A companion decomposition splits the cross terms
/// into the sign-analysis groups of the written argument and must re-assemble
/// to the directly evaluated value.
///
/// Cells whose facet is unsamplable (see boundary_draw_feasible; the C1 facet
/// degenerates away from the (1,0) corner) are reported as infeasible, and
/// each type's sample budget is spread over its feasible cells.
inline ExperimentReport tangent_cone_experiment(const TangentConeConfig& cfg) {
  detail::Stopwatch watch;
  const auto bases = detail::build_bases(cfg.dims);

  struct CellPlan {
    Binding which;
    int dim_index;
    int cell_index;
    long samples = 0;  // 0 => infeasible
  };
  std::vector<CellPlan> plan;
  std::vector<detail::TangentTask> tasks;
  for (Binding which : cfg.facets)
    for (std::size_t d = 0; d < cfg.dims.size(); ++d) {
      std::vector<int> feasible;
      for (std::size_t c = 0; c < cfg.grid.size(); ++c)
        if (boundary_draw_feasible(cfg.grid[c], which))
          feasible.push_back(static_cast<int>(c));
      for (std::size_t c = 0; c < cfg.grid.size(); ++c) {
        CellPlan cp{which, static_cast<int>(d), static_cast<int>(c), 0};
        if (!feasible.empty() &&
            boundary_draw_feasible(cfg.grid[c], which)) {
          const long k = static_cast<long>(feasible.size());
          const long rank =
              std::find(feasible.begin(), feasible.end(), static_cast<int>(c)) -
              feasible.begin();
          cp.samples = cfg.samples_per_type / k +
                       (rank < cfg.samples_per_type % k ? 1 : 0);
        }
        plan.push_back(cp);
      }
    }
  for (const auto& cp : plan)
    for (long s = 0; s < cp.samples; ++s)
      tasks.push_back({cp.which, cp.dim_index, cp.cell_index,
                       static_cast<long>(tasks.size())});

  std::vector<detail::TangentOutcome> results(tasks.size());
  parallel_for(static_cast<long>(tasks.size()), cfg.workers, [&](long ti) {
    const detail::TangentTask& task = tasks[static_cast<std::size_t>(ti)];
    detail::TangentOutcome& out = results[static_cast<std::size_t>(ti)];
    const WedgeBasis& basis = bases[static_cast<std::size_t>(task.dim_index)];
    const ConeParams& params = cfg.grid[static_cast<std::size_t>(task.cell_index)];
    const double l1 = params.lambda1;
    const double l2 = params.lambda2;
    const double w2 = params.c2_weight();
    const int fiber = basis.fiber_dim();

    InConeDraw draw;
    try {
      draw = random_in_cone(params, basis.n(),
                            cfg.seed + static_cast<std::uint64_t>(task.global_id),
                            task.which);
    } catch (const std::runtime_error&) {
      out.sampler_exhausted = true;
      return;
    }
    const Eigen::VectorXd& mu = draw.spectrum;

    const int top = task.which == Binding::C1 ? 3 : 2;
    for (int a = 0; a + 1 < std::min<int>(top + 1, fiber); ++a)
      if (mu(a + 1) - mu(a) < cfg.gap_min) {
        out.skipped_degenerate = true;
        return;
      }

    const CurvatureOperator d_op = ode_rhs(draw.op, basis);
    const Eigen::MatrixXd& dm = d_op.matrix();
    auto quad_form = [&](int a) {
      return draw.frame.col(a).dot(dm * draw.frame.col(a));
    };
    double weighted, quad;
    if (task.which == Binding::C1) {
      weighted = quad_form(0) + l1 * quad_form(1) + l2 * quad_form(2);
      quad = mu(0) * mu(0) + l1 * mu(1) * mu(1) + l2 * mu(2) * mu(2);
    } else {
      weighted = l1 * quad_form(0) + w2 * quad_form(1);
      quad = l1 * mu(0) * mu(0) + w2 * mu(1) * mu(1);
    }

    const auto ct = detail::frame_structure_tables(basis, draw.frame);
    std::array<double, 5> g{};
    if (task.which == Binding::C1) {
      for (int b = 3; b < fiber; ++b) {
        g[0] += ct[0](1, b) * ct[0](1, b) * (mu(1) + l1 * mu(0)) * mu(b);
        g[2] += ct[0](2, b) * ct[0](2, b) * (mu(2) + l2 * mu(0)) * mu(b);
        g[3] += ct[1](2, b) * ct[1](2, b) * (l1 * mu(2) + l2 * mu(1)) * mu(b);
      }
      g[1] = ct[0](1, 2) * ct[0](1, 2) *
             (mu(1) * mu(2) + l1 * mu(0) * mu(2) + l2 * mu(0) * mu(1));
      for (int a = 3; a < fiber; ++a)
        for (int b = a + 1; b < fiber; ++b)
          g[4] += (ct[0](a, b) * ct[0](a, b) + l1 * ct[1](a, b) * ct[1](a, b) +
                   l2 * ct[2](a, b) * ct[2](a, b)) *
                  mu(a) * mu(b);
    } else {
      for (int b = 2; b < fiber; ++b)
        g[0] += ct[0](1, b) * ct[0](1, b) * (l1 * mu(1) + w2 * mu(0)) * mu(b);
      for (int a = 2; a < fiber; ++a)
        for (int b = a + 1; b < fiber; ++b)
          g[1] += (l1 * ct[0](a, b) * ct[0](a, b) + w2 * ct[1](a, b) * ct[1](a, b)) *
                  mu(a) * mu(b);
    }

    const double norm_sq = std::pow(draw.op.inf_norm(), 2);
    const double scale = std::max(1.0, norm_sq);
    double decomposed = quad;
    for (double v : g) decomposed += v;

    out.evaluated = true;
    out.weighted = weighted;
    out.normalized = weighted / scale;
    out.groups = g;
    out.residual = std::abs(weighted - decomposed);

    if (weighted < -cfg.tol * scale) {
      Violation v;
      v.sample_id = task.global_id;
      v.time = 0.0;
      v.margin = weighted;
      v.magnitude = -out.normalized;
      v.note = std::string("tangent-cone ") + binding_name(task.which) +
               " n=" + std::to_string(basis.n()) + " params=" + params_string(params);
      out.violation = v;
    } else if (out.residual > cfg.tol * scale) {
      Violation v;
      v.sample_id = task.global_id;
      v.margin = out.residual;
      v.magnitude = out.residual / scale;
      v.note = "decomposition residual";
      out.violation = v;
    }
  });

  ExperimentReport report;
  report.experiment = "tangent-cone";
  report.seed = cfg.seed;
  report.config.emplace_back("dims", dims_string(cfg.dims));
  report.config.emplace_back("grid_cells", std::to_string(cfg.grid.size()));
  report.config.emplace_back("samples_per_type", std::to_string(cfg.samples_per_type));
  report.config.emplace_back("tol", fmt_g17(cfg.tol));
  report.config.emplace_back("gap_min", fmt_g17(cfg.gap_min));

  long drawn = 0, degenerate = 0, exhausted = 0, evaluated = 0;
  std::size_t task_cursor = 0;
  for (const auto& cp : plan) {
    ReportCell cell;
    const ConeParams& p = cfg.grid[static_cast<std::size_t>(cp.cell_index)];
    cell.label = std::string(binding_name(cp.which)) +
                 " n=" + std::to_string(cfg.dims[static_cast<std::size_t>(cp.dim_index)]) +
                 " params=" + params_string(p);
    if (cp.samples == 0) {
      cell.add("status", "infeasible-boundary");
      cell.add("samples", 0L);
      report.cells.push_back(std::move(cell));
      continue;
    }
    long cell_eval = 0, cell_degen = 0, cell_exhaust = 0;
    double min_weighted = std::numeric_limits<double>::infinity();
    double min_normalized = std::numeric_limits<double>::infinity();
    std::array<double, 5> min_groups;
    min_groups.fill(std::numeric_limits<double>::infinity());
    double max_residual = 0.0;
    for (long s = 0; s < cp.samples; ++s, ++task_cursor) {
      const auto& r = results[task_cursor];
      if (r.sampler_exhausted) {
        ++cell_exhaust;
        continue;
      }
      ++drawn;
      if (r.skipped_degenerate) {
        ++cell_degen;
        continue;
      }
      ++cell_eval;
      min_weighted = std::min(min_weighted, r.weighted);
      min_normalized = std::min(min_normalized, r.normalized);
      for (int k = 0; k < 5; ++k) min_groups[k] = std::min(min_groups[k], r.groups[k]);
      max_residual = std::max(max_residual, r.residual);
      if (r.violation) report.violations.push_back(*r.violation);
    }
    degenerate += cell_degen;
    exhausted += cell_exhaust;
    evaluated += cell_eval;
    cell.add("status", "ok");
    cell.add("samples", cp.samples);
    cell.add("evaluated", cell_eval);
    cell.add("skipped_degenerate", cell_degen);
    cell.add("sampler_exhausted", cell_exhaust);
    if (cell_eval > 0) {
      cell.add("min_weighted", min_weighted);
      cell.add("min_normalized", min_normalized);
      const int ngroups = cp.which == Binding::C1 ? 5 : 2;
      for (int k = 0; k < ngroups; ++k)
        cell.add("min_group_" + std::to_string(k + 1), min_groups[k]);
      cell.add("max_decomposition_residual", max_residual);
    }
    report.cells.push_back(std::move(cell));
  }

  report.samples_total = static_cast<long>(tasks.size());
  report.skipped_total = degenerate + exhausted;
  const double skip_rate = drawn > 0 ? static_cast<double>(degenerate) / drawn : 0.0;
  {
    ReportCell cell;
    cell.label = "totals";
    cell.add("drawn", drawn);
    cell.add("evaluated", evaluated);
    cell.add("skipped_degenerate", degenerate);
    cell.add("sampler_exhausted", exhausted);
    cell.add("degenerate_skip_rate", skip_rate);
    report.cells.push_back(std::move(cell));
  }
  if (skip_rate >= cfg.max_skip_rate) {
    Violation v;
    v.sample_id = -1;
    v.margin = skip_rate;
    v.magnitude = skip_rate;
    v.note = "degenerate skip rate above threshold; spectrum generator is biased";
    report.violations.push_back(v);
  }
  report.wall_seconds = watch.seconds();
  return report;
}

/// Single-cell form. Throws when every drawn sample was skipped (degenerate
/// request), mirroring the per-call error contract.
inline ExperimentReport tangent_cone_experiment(int n, const ConeParams& params,
                                                long samples, std::uint64_t seed,
                                                Binding which, double tol = 1e-8,
                                                int workers = 0) {
  TangentConeConfig cfg;
  cfg.dims = {n};
  cfg.grid = {params};
  cfg.samples_per_type = samples;
  cfg.facets = {which};
  cfg.seed = seed;
  cfg.tol = tol;
  cfg.workers = workers;
  ExperimentReport report = tangent_cone_experiment(cfg);
  for (const auto& cell : report.cells)
    if (cell.label == "totals")
      for (const auto& [k, v] : cell.values)
        if (k == "evaluated" && v == "0")
          throw std::runtime_error(
              "tangent_cone_experiment: all samples skipped (degenerate request)");
  return report;
}

// ---------------------------------------------------------------------------
// Set-identity experiment: the family's intersection is the nonnegative cone
// and its union is the 2-nonnegative cone (weak and strict).
// ---------------------------------------------------------------------------

struct SetIdentityConfig {
  long spectra = 1000;
  int max_fiber = 10;
  LambdaGrid grid = LambdaGrid::standard();
  std::uint64_t seed = 1;
  double tol = 1e-9;
  int workers = 0;
};

namespace detail {

inline Eigen::VectorXd set_identity_spectrum(long id, int max_fiber, Rng& rng) {
  // Fixed specials first, then five rotating families: mixed-sign, all
  // nonnegative, two-nonneg boundary, extreme ratio, nonneg boundary.
  if (id == 0) {
    Eigen::VectorXd mu = Eigen::VectorXd::Ones(max_fiber);
    mu(0) = -1.0;  // the 2-nonneg witness spectrum
    return mu;
  }
  if (id == 1) return Eigen::VectorXd::Zero(max_fiber);
  if (id == 2) return Eigen::VectorXd::Ones(max_fiber);

  const int fiber = 3 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_fiber - 2));
  Eigen::VectorXd mu(fiber);
  const long family = id % 5;
  switch (family) {
    case 0:
      for (int i = 0; i < fiber; ++i) mu(i) = rng.gaussian();
      break;
    case 1:
      for (int i = 0; i < fiber; ++i) mu(i) = std::abs(rng.gaussian());
      break;
    case 2: {
      for (int i = 0; i < fiber; ++i) mu(i) = std::abs(rng.gaussian());
      std::sort(mu.data(), mu.data() + fiber);
      static constexpr double jitters[] = {0.0, 1e-12, -1e-12, 1e-9, -1e-9, 1e-6, -1e-6};
      mu(0) = -mu(1) + jitters[rng.next_u64() % 7];
      break;
    }
    case 3:
      for (int i = 0; i < fiber; ++i)
        mu(i) = rng.gaussian() * std::pow(10.0, -6.0 + 12.0 * rng.uniform01());
      break;
    default: {
      for (int i = 0; i < fiber; ++i) mu(i) = std::abs(rng.gaussian());
      std::sort(mu.data(), mu.data() + fiber);
      static constexpr double eps[] = {0.0, 1e-12, -1e-12, 1e-8, -1e-8};
      mu(0) = eps[rng.next_u64() % 5];
      break;
    }
  }
  std::sort(mu.data(), mu.data() + fiber);
  return mu;
}

struct SetIdentityOutcome {
  bool band_hit = false;
  std::optional<Violation> violation;
};

}  // namespace detail

inline ExperimentReport set_identity_experiment(const SetIdentityConfig& cfg) {
  detail::Stopwatch watch;
  if (cfg.max_fiber < 3 || cfg.max_fiber > 45)
    throw std::invalid_argument("set_identity_experiment: max_fiber in [3, 45]");

  std::vector<detail::SetIdentityOutcome> results(static_cast<std::size_t>(cfg.spectra));
  parallel_for(cfg.spectra, cfg.workers, [&](long i) {
    auto& out = results[static_cast<std::size_t>(i)];
    Rng rng(cfg.seed + static_cast<std::uint64_t>(i));
    const Eigen::VectorXd mu = detail::set_identity_spectrum(i, cfg.max_fiber, rng);

    const IdentityCheck inter = check_intersection_identity(mu, cfg.grid, cfg.tol);
    const IdentityCheck uni = check_union_identity(mu, cfg.grid, false, cfg.tol);
    const IdentityCheck uni_strict = check_union_identity(mu, cfg.grid, true, cfg.tol);

    out.band_hit = inter.within_band;
    auto flag = [&](const IdentityCheck& c, const char* name) {
      if (!c.counterexample || out.violation) return;
      Violation v;
      v.sample_id = i;
      v.margin = mu(0);
      v.magnitude = spectrum_inf_norm(mu);
      v.note = std::string(name) + " disagreement, N=" + std::to_string(mu.size());
      out.violation = v;
    };
    flag(inter, "intersection-identity");
    flag(uni, "union-identity");
    flag(uni_strict, "strict-union-identity");
  });

  ExperimentReport report;
  report.experiment = "set-identity";
  report.seed = cfg.seed;
  report.config.emplace_back("spectra", std::to_string(cfg.spectra));
  report.config.emplace_back("max_fiber", std::to_string(cfg.max_fiber));
  report.config.emplace_back("grid_points", std::to_string(cfg.grid.points.size()));
  report.config.emplace_back("tol", fmt_g17(cfg.tol));

  long band_hits = 0;
  for (const auto& r : results) {
    if (r.band_hit) ++band_hits;
    if (r.violation) report.violations.push_back(*r.violation);
  }
  ReportCell cell;
  cell.label = "totals";
  cell.add("spectra", cfg.spectra);
  cell.add("grid_points", static_cast<long>(cfg.grid.points.size()));
  cell.add("intersection_band_hits", band_hits);
  report.cells.push_back(std::move(cell));
  report.samples_total = cfg.spectra;
  report.wall_seconds = watch.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// Trace experiment: Scal = 2 tr(R) as an identity, nonnegative scalar
// curvature on the cone, and the rigidity of the zero-trace case.
// ---------------------------------------------------------------------------

struct TraceConfig {
  std::vector<int> dims{3, 4, 5};
  long identity_samples = 1000;
  long cone_samples = 1000;  // per parameter pair
  long rigidity_samples = 1000;
  std::vector<ConeParams> params_list;  // default: corner, interior points, randoms
  std::uint64_t seed = 1;
  double tol_identity = 1e-10;
  double tol_nonneg = 1e-9;
  double tol_rigidity = 1e-9;
  int workers = 0;
};

inline std::vector<ConeParams> default_trace_params(std::uint64_t seed, int randoms = 4) {
  std::vector<ConeParams> list{{1.0, 0.0}, {0.75, 0.5}};
  Rng rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  for (int i = 0; i < randoms; ++i) list.push_back(sample_lambda_region(rng));
  return list;
}

inline ExperimentReport trace_identity_experiment(const TraceConfig& cfg_in) {
  detail::Stopwatch watch;
  TraceConfig cfg = cfg_in;
  if (cfg.params_list.empty()) cfg.params_list = default_trace_params(cfg.seed);
  const auto bases = detail::build_bases(cfg.dims);

  const long n_params = static_cast<long>(cfg.params_list.size());
  const long total =
      cfg.identity_samples + cfg.cone_samples * n_params + cfg.rigidity_samples;
  struct Outcome {
    double value = 0.0;  // identity error / Scal / mu inf-norm of accepted member
    bool rigidity_member = false;
    std::optional<Violation> violation;
  };
  std::vector<Outcome> results(static_cast<std::size_t>(total));

  parallel_for(total, cfg.workers, [&](long i) {
    Outcome& out = results[static_cast<std::size_t>(i)];
    const std::size_t d = static_cast<std::size_t>(i) % cfg.dims.size();
    const WedgeBasis& basis = bases[d];
    const int fiber = basis.fiber_dim();
    Rng rng(cfg.seed + static_cast<std::uint64_t>(i));

    if (i < cfg.identity_samples) {
      const Eigen::MatrixXd g = gaussian_matrix(fiber, fiber, rng);
      const CurvatureOperator r(basis.n(), (g + g.transpose()) / 2.0);
      const double err = std::abs(2.0 * r.matrix().trace() - scalar_curvature(r, basis));
      out.value = err;
      if (err > scaled_tol(cfg.tol_identity, r.inf_norm())) {
        Violation v;
        v.sample_id = i;
        v.margin = err;
        v.magnitude = err / std::max(1.0, r.inf_norm());
        v.note = "trace identity |2 tr - Scal| out of tolerance";
        out.violation = v;
      }
      return;
    }

    if (i < cfg.identity_samples + cfg.cone_samples * n_params) {
      const long j = i - cfg.identity_samples;
      const ConeParams& params = cfg.params_list[static_cast<std::size_t>(j / cfg.cone_samples)];
      const std::optional<Binding> boundary =
          (j % 2 == 1) ? std::optional<Binding>(Binding::C2) : std::nullopt;
      const InConeDraw draw =
          random_in_cone(params, basis.n(), rng.next_u64(), boundary);
      const double scal = scalar_curvature(draw.op, basis);
      out.value = scal;
      if (scal < -cfg.tol_nonneg) {
        Violation v;
        v.sample_id = i;
        v.margin = scal;
        v.magnitude = -scal;
        v.note = "negative scalar curvature on in-cone draw, params=" +
                 params_string(params);
        out.violation = v;
      }
      return;
    }

    // Rigidity: zero-trace spectra aimed at the cone's closure must collapse
    // to the origin. Constructed spectra set mu_1 = -(mu_2 + ... + mu_N); the
    // first few samples take the exact zero spectrum (the equality case).
    const long j = i - cfg.identity_samples - cfg.cone_samples * n_params;
    const ConeParams& params = cfg.params_list[static_cast<std::size_t>(j) % cfg.params_list.size()];
    Eigen::VectorXd mu(fiber);
    if (j < static_cast<long>(cfg.dims.size())) {
      mu.setZero();
    } else {
      static constexpr double scales[] = {1.0, 1e-6, 1e3};
      const double scale = scales[j % 3];
      for (int a = 1; a < fiber; ++a) mu(a) = scale * std::abs(rng.gaussian());
      std::sort(mu.data() + 1, mu.data() + fiber);
      mu(0) = -mu.tail(fiber - 1).sum();
    }
    const ConeVerdict verdict = cone_contains(mu, params, false, 1e-12);
    if (verdict.member) {
      out.rigidity_member = true;
      out.value = spectrum_inf_norm(mu);
      if (out.value >= cfg.tol_rigidity) {
        Violation v;
        v.sample_id = i;
        v.margin = verdict.margin;
        v.magnitude = out.value;
        v.note = "nonzero zero-trace operator inside the cone closure, params=" +
                 params_string(params);
        out.violation = v;
      }
    }
  });

  ExperimentReport report;
  report.experiment = "trace";
  report.seed = cfg.seed;
  report.config.emplace_back("dims", dims_string(cfg.dims));
  report.config.emplace_back("identity_samples", std::to_string(cfg.identity_samples));
  report.config.emplace_back("cone_samples", std::to_string(cfg.cone_samples));
  report.config.emplace_back("rigidity_samples", std::to_string(cfg.rigidity_samples));
  report.config.emplace_back("params_count", std::to_string(n_params));
  for (std::size_t p = 0; p < cfg.params_list.size(); ++p)
    report.config.emplace_back("params." + std::to_string(p),
                               params_string(cfg.params_list[p]));
  report.config.emplace_back("tol_identity", fmt_g17(cfg.tol_identity));
  report.config.emplace_back("tol_nonneg", fmt_g17(cfg.tol_nonneg));
  report.config.emplace_back("tol_rigidity", fmt_g17(cfg.tol_rigidity));

  double max_identity_err = 0.0, min_scal = std::numeric_limits<double>::infinity();
  long rigidity_members = 0;
  double max_member_norm = 0.0;
  for (long i = 0; i < total; ++i) {
    const auto& r = results[static_cast<std::size_t>(i)];
    if (i < cfg.identity_samples) {
      max_identity_err = std::max(max_identity_err, r.value);
    } else if (i < cfg.identity_samples + cfg.cone_samples * n_params) {
      min_scal = std::min(min_scal, r.value);
    } else if (r.rigidity_member) {
      ++rigidity_members;
      max_member_norm = std::max(max_member_norm, r.value);
    }
    if (r.violation) report.violations.push_back(*r.violation);
  }
  {
    ReportCell cell;
    cell.label = "identity";
    cell.add("samples", cfg.identity_samples);
    cell.add("max_error", max_identity_err);
    report.cells.push_back(std::move(cell));
  }
  {
    ReportCell cell;
    cell.label = "cone-scal";
    cell.add("samples", cfg.cone_samples * n_params);
    cell.add("min_scal", min_scal);
    report.cells.push_back(std::move(cell));
  }
  {
    ReportCell cell;
    cell.label = "rigidity";
    cell.add("samples", cfg.rigidity_samples);
    cell.add("members_found", rigidity_members);
    cell.add("max_member_spectrum_norm", max_member_norm);
    report.cells.push_back(std::move(cell));
  }
  report.samples_total = total;
  report.wall_seconds = watch.seconds();
  return report;
}

}  // namespace curvcone
