// curvcone CLI: runs the cone-invariance experiment suite for Hamilton's
// curvature ODE and writes machine-readable reports.
//
//   curvcone run <experiment> [options]
//
// experiment: invariance | tangent-cone | set-identity | trace | all
// Exit status: 0 all verdicts pass, 1 any violation, 2 configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curvcone/run_config.hpp"
#include "curvcone/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Curvature-operator cone experiments for dR/dt = R^2 + R#"};
  app.require_subcommand(1);

  CLI::App* run_cmd = app.add_subcommand("run", "run experiments and write reports");

  std::string experiment;
  std::string dims_arg, config_path, grid_spec;
  double lambda1 = 0, lambda2 = 0, dt0 = 0, t_max = 0, norm_cap = 0;
  double tol_rel = 0, cone_tol = 0, tangent_tol = 0;
  long trials = 0, samples = 0, spectra = 0;
  unsigned long long seed = 0;
  std::string out_dir, output;
  int workers = -1, tangent_grid_edge = 0;

  run_cmd->add_option("experiment", experiment,
                      "invariance | tangent-cone | set-identity | trace | all")
      ->required();
  auto* o_n = run_cmd->add_option("--n", dims_arg, "ambient dimensions, e.g. 3 or 3,4");
  auto* o_l1 = run_cmd->add_option("--lambda1", lambda1, "cone parameter lambda1");
  auto* o_l2 = run_cmd->add_option("--lambda2", lambda2, "cone parameter lambda2");
  auto* o_trials = run_cmd->add_option("--trials", trials, "invariance trajectories");
  auto* o_samples = run_cmd->add_option("--samples", samples,
                                        "tangent-cone samples per type / trace samples per part");
  auto* o_spectra = run_cmd->add_option("--spectra", spectra, "set-identity spectra");
  auto* o_seed = run_cmd->add_option("--seed", seed, "base seed");
  auto* o_dt0 = run_cmd->add_option("--dt0", dt0, "initial integrator step");
  auto* o_tmax = run_cmd->add_option("--t-max", t_max, "integration horizon");
  auto* o_cap = run_cmd->add_option("--norm-cap", norm_cap, "blow-up norm threshold");
  auto* o_tolrel = run_cmd->add_option("--tol-rel", tol_rel, "invariance margin tolerance");
  auto* o_conetol = run_cmd->add_option("--cone-tol", cone_tol, "cone membership tolerance");
  auto* o_tangenttol =
      run_cmd->add_option("--tangent-tol", tangent_tol, "tangent-cone tolerance");
  auto* o_out = run_cmd->add_option("--out", out_dir, "output directory");
  auto* o_output = run_cmd->add_option("--output", output, "report | trajectories | both");
  auto* o_workers = run_cmd->add_option("--workers", workers,
                                        "parallelism (0 = all cores; never changes output bytes)");
  auto* o_grid = run_cmd->add_option("--grid", grid_spec, "set-identity grid, e.g. 50x50+20");
  auto* o_tgrid = run_cmd->add_option("--tangent-grid", tangent_grid_edge,
                                      "tangent-cone parameter grid edge");
  run_cmd->add_option("--config", config_path, "key-value config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  curvcone::RunConfig cfg;
  cfg.experiment = experiment;

  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "config error: cannot open config file '" << config_path << "'\n";
      return 2;
    }
    try {
      curvcone::load_config_stream(cfg, f, cfg.experiment);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }

  if (const char* env = std::getenv("CURVCONE_OUT"); env && !o_out->count()) {
    cfg.out_dir = env;
    cfg.out_dir_explicit = true;
  }

  try {
    if (o_n->count()) cfg.dims = curvcone::parse_int_list(dims_arg);
    if (o_grid->count())
      curvcone::parse_grid_spec(grid_spec, cfg.grid_cols, cfg.grid_rows, cfg.grid_near);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (o_l1->count()) cfg.lambda1 = lambda1;
  if (o_l2->count()) cfg.lambda2 = lambda2;
  if (o_trials->count()) cfg.trials = trials;
  if (o_samples->count()) cfg.samples = samples;
  if (o_spectra->count()) cfg.spectra = spectra;
  if (o_seed->count()) cfg.seed = seed;
  if (o_dt0->count()) cfg.dt0 = dt0;
  if (o_tmax->count()) cfg.t_max = t_max;
  if (o_cap->count()) cfg.norm_cap = norm_cap;
  if (o_tolrel->count()) cfg.tol_rel = tol_rel;
  if (o_conetol->count()) cfg.cone_tol = cone_tol;
  if (o_tangenttol->count()) cfg.tangent_tol = tangent_tol;
  if (o_out->count()) {
    cfg.out_dir = out_dir;
    cfg.out_dir_explicit = true;
  }
  if (o_output->count()) cfg.output = output;
  if (o_workers->count()) cfg.workers = workers;
  if (o_tgrid->count()) cfg.tangent_grid_edge = tangent_grid_edge;

  return curvcone::run(cfg, std::cout, std::cerr);
}
