// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria pin the tolerances of the library's checked claims:
//
//  1. structure constants (antisymmetry, Jacobi, n = 3 values)
//  2. sharp product algebra (commutativity, symmetry, bilinearity,
//     equivariance, dimension-3 adjugate law)
//  3. integrator against the closed-form and diagonal oracles, order 4
//  4. witness operator separation (2-nonnegative vs the cone family)
//  5. cone invariance along dR/dt = R^2 + R# (1000 trajectories)
//  6. tangent-cone nonnegativity on boundary draws
//  7. set identities over the parameter grid
//  8. trace identity, in-cone scalar curvature, zero-trace rigidity
//  9. byte-identical reports at parallelism 1 and 8

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvcone/curvcone.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace curvcone;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
      (i == 2 && j == 0 && k == 1))
    return 1;
  return -1;
}

CurvatureOperator random_symmetric(const WedgeBasis& basis, Rng& rng) {
  const int fiber = basis.fiber_dim();
  const Eigen::MatrixXd g = gaussian_matrix(fiber, fiber, rng);
  return CurvatureOperator(basis.n(), (g + g.transpose()) / 2.0);
}

// --- criterion bodies -------------------------------------------------------

Outcome criterion_structure_constants() {
  Outcome out;
  double worst_anti = 0.0, worst_jacobi = 0.0;
  for (int n : {3, 4, 5}) {
    WedgeBasis basis(n);
    const int fiber = basis.fiber_dim();
    for (int g = 0; g < fiber; ++g)
      for (int a = 0; a < fiber; ++a)
        for (int b = 0; b < fiber; ++b) {
          worst_anti = std::max(worst_anti, std::abs(basis.c(g, a, b) + basis.c(g, b, a)));
          worst_anti = std::max(worst_anti, std::abs(basis.c(g, a, b) + basis.c(b, a, g)));
        }
    for (int a = 0; a < fiber; ++a)
      for (int b = 0; b < fiber; ++b)
        for (int g = 0; g < fiber; ++g)
          for (int nu = 0; nu < fiber; ++nu) {
            double sum = 0.0;
            for (int m = 0; m < fiber; ++m)
              sum += basis.c(m, a, b) * basis.c(nu, m, g) +
                     basis.c(m, b, g) * basis.c(nu, m, a) +
                     basis.c(m, g, a) * basis.c(nu, m, b);
            worst_jacobi = std::max(worst_jacobi, std::abs(sum));
          }
  }
  out.require(worst_anti < 1e-10, "antisymmetry " + fmt_g6(worst_anti));
  out.require(worst_jacobi < 1e-10, "jacobi " + fmt_g6(worst_jacobi));

  WedgeBasis b3(3);
  double worst_eps = 0.0;
  const double s = 1.0 / std::sqrt(2.0);
  for (int g = 0; g < 3; ++g)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        worst_eps =
            std::max(worst_eps, std::abs(b3.c(g, a, b) - levi_civita(a, b, g) * s));
  out.require(worst_eps < 1e-12, "n=3 eps/sqrt2 " + fmt_g6(worst_eps));
  if (out.pass)
    out.detail = "max antisymmetry " + fmt_g6(worst_anti) + ", max jacobi " +
                 fmt_g6(worst_jacobi);
  return out;
}

Outcome criterion_sharp_suite() {
  Outcome out;
  Rng rng(2);
  double worst = 0.0;
  for (int n : {3, 4}) {
    WedgeBasis basis(n);
    for (int rep = 0; rep < 200; ++rep) {
      const CurvatureOperator a = random_symmetric(basis, rng);
      const CurvatureOperator b = random_symmetric(basis, rng);
      const CurvatureOperator ab = sharp(a, b, basis);
      worst = std::max(worst, max_abs(ab.matrix() - sharp(b, a, basis).matrix()));
      worst = std::max(worst, max_abs(ab.matrix() - ab.matrix().transpose()));

      const CurvatureOperator a2 = random_symmetric(basis, rng);
      const Eigen::MatrixXd lin =
          sharp(CurvatureOperator(n, 0.3 * a.matrix() - 1.7 * a2.matrix()), b, basis)
              .matrix();
      worst = std::max(worst, max_abs(lin - (0.3 * ab.matrix() -
                                             1.7 * sharp(a2, b, basis).matrix())));

      const Eigen::MatrixXd q = basis.induced_rotation(haar_rotation(n, rng));
      const Eigen::MatrixXd equiv =
          sharp(CurvatureOperator(n, q * a.matrix() * q.transpose()),
                CurvatureOperator(n, q * b.matrix() * q.transpose()), basis)
              .matrix();
      worst = std::max(worst, max_abs(equiv - q * ab.matrix() * q.transpose()));
    }
  }
  out.require(worst < 1e-9, "sharp algebra violation " + fmt_g6(worst));

  WedgeBasis b3(3);
  double worst_adj = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::Vector3d mu;
    for (int i = 0; i < 3; ++i) mu(i) = 3.0 * rng.gaussian();
    const CurvatureOperator a(3, Eigen::MatrixXd(mu.asDiagonal()));
    const Eigen::Vector3d adj(0.5 * mu(1) * mu(2), 0.5 * mu(0) * mu(2),
                              0.5 * mu(0) * mu(1));
    worst_adj = std::max(worst_adj, max_abs(sharp_self(a, b3).matrix() -
                                            Eigen::MatrixXd(adj.asDiagonal())));
  }
  out.require(worst_adj < 1e-12, "adjugate law " + fmt_g6(worst_adj));
  if (out.pass)
    out.detail = "max violation " + fmt_g6(worst) + ", adjugate " + fmt_g6(worst_adj);
  return out;
}

Outcome criterion_integrator_oracle() {
  Outcome out;
  WedgeBasis basis(3);
  const CurvatureOperator i3 = CurvatureOperator::Identity(3);
  const double c = 1.0 + sharp_self(i3, basis)(0, 0);  // 3/2 for n = 3

  auto terminal_error = [&](double dt0) {
    IntegratorConfig cfg;
    cfg.dt0 = dt0;
    cfg.t_max = 0.9 / c;
    cfg.norm_cap = 1e12;
    const auto rec = integrate(i3, basis, cfg);
    const auto& last = rec.samples.back();
    double err = 0.0;
    const double expect = oracles::riccati(1.0, c, last.t);
    for (int a = 0; a < 3; ++a)
      err = std::max(err, std::abs(last.mu(a) - expect) / expect);
    return err;
  };
  const double e1 = terminal_error(4e-3);
  const double e2 = terminal_error(2e-3);
  out.require(e2 < 1e-6, "closed-form error " + fmt_g6(e2));
  const double factor = e1 / e2;
  out.require(factor > 8.0 && factor < 32.0, "order factor " + fmt_g6(factor));

  double worst_diag = 0.0;
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::Vector3d mu0;
    mu0 << -std::abs(rng.gaussian()), 0.5 * rng.gaussian(), 1.0 + std::abs(rng.gaussian());
    std::sort(mu0.data(), mu0.data() + 3);
    IntegratorConfig cfg;
    cfg.dt0 = 5e-4;
    cfg.t_max = 0.15;
    cfg.norm_cap = 1e10;
    const auto rec = integrate(CurvatureOperator(3, Eigen::MatrixXd(mu0.asDiagonal())),
                               basis, cfg);
    if (rec.status != TerminalStatus::ReachedTMax) continue;
    Eigen::Vector3d oracle = oracles::integrate_diagonal3(mu0, rec.samples.back().t, 1e-5);
    std::sort(oracle.data(), oracle.data() + 3);
    worst_diag = std::max(worst_diag, (rec.samples.back().mu - oracle).cwiseAbs().maxCoeff());
  }
  out.require(worst_diag < 1e-7, "diagonal oracle " + fmt_g6(worst_diag));
  if (out.pass)
    out.detail = "closed-form err " + fmt_g6(e2) + ", order factor " + fmt_g6(factor) +
                 ", diagonal err " + fmt_g6(worst_diag);
  return out;
}

Outcome criterion_witness() {
  Outcome out;
  const CurvatureOperator w = two_nonneg_witness(4);
  const Eigen::VectorXd mu = eigen_sorted(w).values;
  out.require(two_nonneg_contains(mu), "2-nonnegativity");
  const auto corner = cone_contains(mu, ConeParams{1.0, 0.0});
  out.require(corner.member && std::abs(corner.margin) <= 1e-12,
              "corner margin " + fmt_g6(corner.margin));
  const auto mid = cone_contains(mu, ConeParams{0.75, 0.5});
  out.require(!mid.member, "rejected at (3/4, 1/2)");
  out.require(mid.binding == Binding::C2, "C2 binding");
  out.require(std::abs(mid.margin - (-0.375)) <= 1e-12,
              "margin -3/8, got " + fmt_g6(mid.margin));
  if (out.pass) out.detail = "margin at (3/4,1/2) = " + fmt_g6(mid.margin);
  return out;
}

RunConfig invariance_run_config(const fs::path& out_dir, int workers) {
  RunConfig cfg;
  cfg.experiment = "invariance";
  cfg.dims = {3, 4};
  cfg.trials = 1000;
  cfg.seed = 7;
  cfg.t_max = 3.0;
  cfg.workers = workers;
  cfg.out_dir = out_dir.string();
  return cfg;
}

constexpr const char* kInvarianceReport = "invariance_n3-4_l1_rand_seed7.report.txt";

Outcome criterion_invariance(const fs::path& root) {
  Outcome out;
  std::ostringstream os, es;
  const int code = run(invariance_run_config(root / "c5", 8), os, es);
  out.require(code == 0, "exit " + std::to_string(code) + " " + es.str());
  const std::string report = slurp(root / "c5" / kInvarianceReport);
  out.require(report.find("verdict = pass") != std::string::npos, "verdict");
  out.require(report.find("violations.count = 0") != std::string::npos, "violations");
  if (out.pass) {
    out.detail = "1000 trajectories, zero persistent violations";
    const auto at = report.find("min_normalized_margin = ");
    if (at != std::string::npos) {
      const auto end = report.find('\n', at);
      out.detail += ", min margin " + report.substr(at + 24, end - at - 24);
    }
  }
  return out;
}

Outcome criterion_tangent_cone() {
  Outcome out;
  TangentConeConfig cfg;
  cfg.dims = {3, 4, 5};
  cfg.grid = tangent_grid(5);
  cfg.samples_per_type = 1000;
  cfg.seed = 11;
  cfg.workers = 8;
  const ExperimentReport report = tangent_cone_experiment(cfg);
  out.require(report.pass(), std::to_string(report.violations.size()) + " violations");

  double min_normalized = std::numeric_limits<double>::infinity(), skip_rate = 0.0;
  for (const auto& cell : report.cells)
    for (const auto& [k, v] : cell.values) {
      if (k == "min_normalized") min_normalized = std::min(min_normalized, std::stod(v));
      if (k == "degenerate_skip_rate") skip_rate = std::stod(v);
    }
  out.require(min_normalized >= -1e-8, "empirical min " + fmt_g6(min_normalized));
  out.require(skip_rate < 0.05, "skip rate " + fmt_g6(skip_rate));
  if (out.pass)
    out.detail = "empirical min " + fmt_g6(min_normalized) + ", skip rate " +
                 fmt_g6(skip_rate);
  return out;
}

Outcome criterion_set_identity() {
  Outcome out;
  SetIdentityConfig cfg;
  cfg.spectra = 1000;
  cfg.max_fiber = 10;
  cfg.grid = LambdaGrid::standard(50, 50, 20);
  cfg.seed = 13;
  cfg.workers = 8;
  const ExperimentReport report = set_identity_experiment(cfg);
  out.require(report.pass(), std::to_string(report.violations.size()) + " disagreements");
  if (out.pass)
    out.detail = "1000 spectra x " + std::to_string(cfg.grid.points.size()) +
                 " grid points, zero disagreements";
  return out;
}

Outcome criterion_trace() {
  Outcome out;
  TraceConfig cfg;
  cfg.dims = {3, 4, 5};
  cfg.identity_samples = 1000;
  cfg.cone_samples = 1000;
  cfg.rigidity_samples = 1000;
  cfg.seed = 17;
  cfg.workers = 8;
  const ExperimentReport report = trace_identity_experiment(cfg);
  out.require(report.pass(), std::to_string(report.violations.size()) + " violations");
  double max_err = 0.0, min_scal = 0.0, max_member = 0.0;
  for (const auto& cell : report.cells)
    for (const auto& [k, v] : cell.values) {
      if (k == "max_error") max_err = std::stod(v);
      if (k == "min_scal") min_scal = std::stod(v);
      if (k == "max_member_spectrum_norm") max_member = std::stod(v);
    }
  out.require(min_scal >= -1e-9, "min Scal " + fmt_g6(min_scal));
  out.require(max_member < 1e-9, "rigidity norm " + fmt_g6(max_member));
  if (out.pass)
    out.detail = "identity err " + fmt_g6(max_err) + ", min Scal " + fmt_g6(min_scal) +
                 ", rigidity norm " + fmt_g6(max_member);
  return out;
}

Outcome criterion_determinism(const fs::path& root) {
  Outcome out;
  std::ostringstream os, es;
  out.require(run(invariance_run_config(root / "c9w1", 1), os, es) == 0, "par-1 run");
  out.require(run(invariance_run_config(root / "c9w8", 8), os, es) == 0, "par-8 run");
  const std::string base = slurp(root / "c5" / kInvarianceReport);
  const std::string w1 = slurp(root / "c9w1" / kInvarianceReport);
  const std::string w8 = slurp(root / "c9w8" / kInvarianceReport);
  out.require(!base.empty() && base == w1, "par-1 bytes differ");
  out.require(base == w8, "par-8 rerun bytes differ");
  if (out.pass)
    out.detail = "3 runs, " + std::to_string(base.size()) + " report bytes identical";
  return out;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "curvcone-acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  struct Entry {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> body;
  };
  const std::vector<Entry> entries = {
      {"structure constants", 1.0, criterion_structure_constants},
      {"sharp product suite", 10.0, criterion_sharp_suite},
      {"integrator oracle", 5.0, criterion_integrator_oracle},
      {"witness operator separation", 1.0, criterion_witness},
      {"cone invariance (1000 trajectories)", 600.0,
       [&] { return criterion_invariance(root); }},
      {"tangent cone (1000 per facet type)", 300.0, criterion_tangent_cone},
      {"set identities (1000 spectra)", 120.0, criterion_set_identity},
      {"trace identity / rigidity", 60.0, criterion_trace},
      {"report determinism across parallelism", 1200.0,
       [&] { return criterion_determinism(root); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = entries[i].body();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > entries[i].budget_seconds) {
      out.pass = false;
      out.detail += (out.detail.empty() ? "" : "; ") + std::string("over time budget ") +
                    fmt_g6(entries[i].budget_seconds) + " s";
    }
    std::printf("[%s] %zu. %s%s%s (%.2f s)\n", out.pass ? "PASS" : "FAIL", i + 1,
                entries[i].name, out.detail.empty() ? "" : " - ", out.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  fs::remove_all(root);
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
