#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "curvcone/experiments.hpp"
#include "curvcone/flow.hpp"
#include "curvcone/reporting.hpp"
#include "curvcone/run_config.hpp"

namespace curvcone {

namespace detail {

inline std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string dims_tag(const std::vector<int>& dims) {
  std::string s = "n";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += "-";
    s += std::to_string(dims[i]);
  }
  return s;
}

inline std::string params_tag(const RunConfig& cfg) {
  if (!cfg.lambda1) return "l1_rand";
  return "l1_" + short_num(*cfg.lambda1) + "_l2_" + short_num(*cfg.lambda2);
}

}  // namespace detail

inline InvarianceConfig make_invariance_config(const RunConfig& cfg) {
  InvarianceConfig out;
  out.dims = cfg.dims.empty() ? std::vector<int>{3, 4} : cfg.dims;
  if (cfg.lambda1) out.params = ConeParams{*cfg.lambda1, *cfg.lambda2};
  out.trials = cfg.trials;
  out.seed = cfg.seed;
  if (cfg.dt0) out.integrator.dt0 = *cfg.dt0;
  if (cfg.t_max) out.integrator.t_max = *cfg.t_max;
  if (cfg.norm_cap) out.integrator.norm_cap = *cfg.norm_cap;
  if (cfg.tol_rel) out.tol_rel = *cfg.tol_rel;
  out.workers = cfg.workers;
  return out;
}

inline TangentConeConfig make_tangent_config(const RunConfig& cfg) {
  TangentConeConfig out;
  out.dims = cfg.dims.empty() ? std::vector<int>{3, 4, 5} : cfg.dims;
  out.grid = cfg.lambda1 ? std::vector<ConeParams>{{*cfg.lambda1, *cfg.lambda2}}
                         : tangent_grid(cfg.tangent_grid_edge);
  out.samples_per_type = cfg.samples;
  out.seed = cfg.seed;
  if (cfg.tangent_tol) out.tol = *cfg.tangent_tol;
  out.workers = cfg.workers;
  return out;
}

inline SetIdentityConfig make_set_identity_config(const RunConfig& cfg) {
  SetIdentityConfig out;
  out.spectra = cfg.spectra;
  out.grid = LambdaGrid::standard(cfg.grid_cols, cfg.grid_rows, cfg.grid_near);
  out.seed = cfg.seed;
  if (cfg.cone_tol) out.tol = *cfg.cone_tol;
  out.workers = cfg.workers;
  return out;
}

inline TraceConfig make_trace_config(const RunConfig& cfg) {
  TraceConfig out;
  out.dims = cfg.dims.empty() ? std::vector<int>{3, 4, 5} : cfg.dims;
  out.identity_samples = cfg.samples;
  out.cone_samples = cfg.samples;
  out.rigidity_samples = cfg.samples;
  if (cfg.lambda1) out.params_list = {ConeParams{*cfg.lambda1, *cfg.lambda2}};
  out.seed = cfg.seed;
  out.workers = cfg.workers;
  return out;
}

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string bad = validate_run_config(cfg);
  if (!bad.empty()) {
    err << "config error: " << bad << "\n";
    return 2;
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec || !fs::is_directory(cfg.out_dir, ec)) {
    err << "config error: cannot create output directory '" << cfg.out_dir << "'\n";
    return 2;
  }
  {
    std::ofstream probe(fs::path(cfg.out_dir) / ".writable");
    if (!probe) {
      err << "config error: output directory '" << cfg.out_dir << "' is not writable\n";
      return 2;
    }
    probe.close();
    fs::remove(fs::path(cfg.out_dir) / ".writable", ec);
  }

  std::vector<std::string> experiments;
  if (cfg.experiment == "all")
    experiments = {"invariance", "tangent-cone", "set-identity", "trace"};
  else
    experiments = {cfg.experiment};

  std::vector<std::pair<std::string, std::string>> manifest;  // name, content
  bool all_pass = true;

  auto emit = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(cfg.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) {
      err << "config error: failed to write '" << path.string() << "'\n";
      return false;
    }
    manifest.emplace_back(name, content);
    return true;
  };

  for (const std::string& name : experiments) {
    ExperimentReport report;
    std::string tag;
    try {
      if (name == "invariance") {
        const auto ec_inv = make_invariance_config(cfg);
        report = invariance_experiment(ec_inv);
        tag = detail::dims_tag(ec_inv.dims) + "_" + detail::params_tag(cfg);
        if (cfg.want_trajectories()) {
          IntegratorConfig integ = ec_inv.integrator;
          integ.store_operators = false;
          std::vector<std::string> names(static_cast<std::size_t>(ec_inv.trials));
          std::vector<std::string> bodies(static_cast<std::size_t>(ec_inv.trials));
          const auto bases = detail::build_bases(ec_inv.dims);
          parallel_for(ec_inv.trials, cfg.workers, [&](long i) {
            const InvarianceTrialSetup s = invariance_trial_setup(ec_inv, i);
            InConeDraw draw;
            try {
              draw = random_in_cone(s.params, s.n, s.sampler_seed, s.boundary);
            } catch (const std::runtime_error&) {
              return;  // skipped trial: no trajectory
            }
            const WedgeBasis& basis =
                bases[static_cast<std::size_t>(i) % ec_inv.dims.size()];
            const TrajectoryRecord traj = integrate(draw.op, basis, integ, s.params);
            std::ostringstream os;
            write_trajectory(os, traj, basis.fiber_dim());
            char fname[96];
            std::snprintf(fname, sizeof fname,
                          "invariance_trial%05ld_n%d_seed%llu.traj.txt", i, s.n,
                          static_cast<unsigned long long>(cfg.seed));
            names[static_cast<std::size_t>(i)] = fname;
            bodies[static_cast<std::size_t>(i)] = os.str();
          });
          for (std::size_t i = 0; i < names.size(); ++i)
            if (!names[i].empty() && !emit(names[i], bodies[i])) return 2;
        }
      } else if (name == "tangent-cone") {
        const auto tc = make_tangent_config(cfg);
        report = tangent_cone_experiment(tc);
        tag = detail::dims_tag(tc.dims) + "_" + detail::params_tag(cfg);
      } else if (name == "set-identity") {
        const auto sc = make_set_identity_config(cfg);
        report = set_identity_experiment(sc);
        tag = "grid" + std::to_string(cfg.grid_cols) + "x" +
              std::to_string(cfg.grid_rows) + "+" + std::to_string(cfg.grid_near);
      } else {
        const auto trc = make_trace_config(cfg);
        report = trace_identity_experiment(trc);
        tag = detail::dims_tag(trc.dims) + "_" + detail::params_tag(cfg);
      }
    } catch (const std::invalid_argument& e) {
      err << "config error: " << e.what() << "\n";
      return 2;
    }

    const std::string fname = name + "_" + tag + "_seed" + std::to_string(cfg.seed) +
                              ".report.txt";
    if (!emit(fname, report.to_report_text())) return 2;
    out << report.to_summary_text();
    all_pass = all_pass && report.pass();
  }

  {
    KvWriter kv;
    for (const auto& [fname, content] : manifest)
      kv.add("file." + fname, fnv1a64_hex(content));
    const fs::path path = fs::path(cfg.out_dir) / "manifest.txt";
    std::ofstream f(path, std::ios::binary);
    f << kv.str();
    if (!f) {
      err << "config error: failed to write manifest\n";
      return 2;
    }
  }

  return all_pass ? 0 : 1;
}

}  // namespace curvcone
