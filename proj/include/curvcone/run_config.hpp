#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvcone/cones.hpp"

namespace curvcone {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"invariance", "tangent-cone",
                                              "set-identity", "trace", "all"};
  return names;
}

/// Effective settings of one CLI run. Every field has a default; precedence
/// is defaults < config file (global section, then the experiment's section)
/// < CURVCONE_OUT (output directory only) < command-line flags.
struct RunConfig {
  std::string experiment = "all";
  std::vector<int> dims;  // empty: per-experiment defaults
  std::optional<double> lambda1, lambda2;
  long trials = 1000;   // invariance trajectories
  long samples = 1000;  // tangent-cone per type; trace per part
  long spectra = 1000;  // set-identity spectra
  std::uint64_t seed = 1;
  std::optional<double> dt0, t_max, norm_cap;      // integrator overrides
  std::optional<double> tol_rel, cone_tol, tangent_tol;  // tolerance overrides
  std::string out_dir = "curvcone-out";
  bool out_dir_explicit = false;
  std::string output = "report";  // report | trajectories | both
  int workers = 0;                // 0: hardware concurrency
  int grid_cols = 50, grid_rows = 50, grid_near = 20;  // set-identity grid
  int tangent_grid_edge = 5;

  bool want_trajectories() const { return output == "trajectories" || output == "both"; }
};

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

/// "COLSxROWS+NEAR", e.g. "50x50+20" ("+NEAR" optional).
inline void parse_grid_spec(const std::string& s, int& cols, int& rows, int& near) {
  const auto x = s.find('x');
  if (x == std::string::npos)
    throw std::invalid_argument("grid spec must look like 50x50+20");
  const auto plus = s.find('+', x);
  cols = std::stoi(s.substr(0, x));
  rows = std::stoi(plus == std::string::npos ? s.substr(x + 1)
                                             : s.substr(x + 1, plus - x - 1));
  if (plus != std::string::npos) near = std::stoi(s.substr(plus + 1));
}

/// Applies one config-file key. Throws std::invalid_argument on unknown keys
/// or malformed values.
inline void apply_config_key(RunConfig& cfg, const std::string& key,
                             const std::string& value) {
  try {
    if (key == "n") cfg.dims = parse_int_list(value);
    else if (key == "lambda1") cfg.lambda1 = std::stod(value);
    else if (key == "lambda2") cfg.lambda2 = std::stod(value);
    else if (key == "trials") cfg.trials = std::stol(value);
    else if (key == "samples") cfg.samples = std::stol(value);
    else if (key == "spectra") cfg.spectra = std::stol(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "dt0") cfg.dt0 = std::stod(value);
    else if (key == "t_max") cfg.t_max = std::stod(value);
    else if (key == "norm_cap") cfg.norm_cap = std::stod(value);
    else if (key == "tol_rel") cfg.tol_rel = std::stod(value);
    else if (key == "cone_tol") cfg.cone_tol = std::stod(value);
    else if (key == "tangent_tol") cfg.tangent_tol = std::stod(value);
    else if (key == "out_dir") { cfg.out_dir = value; cfg.out_dir_explicit = true; }
    else if (key == "output") cfg.output = value;
    else if (key == "workers") cfg.workers = std::stoi(value);
    else if (key == "grid") parse_grid_spec(value, cfg.grid_cols, cfg.grid_rows, cfg.grid_near);
    else if (key == "tangent_grid") cfg.tangent_grid_edge = std::stoi(value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad value for config key '" + key + "': " + value);
  }
}

/// Flat key-value config file: "key = value" lines, '#' comments, optional
/// [experiment] sections. Keys before any section apply to every experiment;
/// a section's keys apply only when running that experiment ("all" takes
/// every section's keys in file order).
inline void load_config_stream(RunConfig& cfg, std::istream& in,
                               const std::string& experiment) {
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty() || section == experiment ||
        (experiment == "all" && true))
      apply_config_key(cfg, key, value);
  }
}

/// Empty string when the config is runnable; otherwise a message naming the
/// violated constraint (the CLI reports it and exits with status 2).
inline std::string validate_run_config(const RunConfig& cfg) {
  bool known = false;
  for (const auto& name : experiment_names()) known = known || name == cfg.experiment;
  if (!known) return "unknown experiment '" + cfg.experiment + "'";
  if (cfg.lambda1.has_value() != cfg.lambda2.has_value())
    return "lambda1 and lambda2 must be given together";
  if (cfg.lambda1) {
    const std::string why = lambda_region_violation(*cfg.lambda1, *cfg.lambda2);
    if (!why.empty()) return "(lambda1, lambda2) outside the parameter region: " + why;
  }
  for (int n : cfg.dims)
    if (n < 3 || n > 10) return "n must be in [3, 10]";
  if (cfg.trials < 1) return "trials must be >= 1";
  if (cfg.samples < 1) return "samples must be >= 1";
  if (cfg.spectra < 1) return "spectra must be >= 1";
  if (cfg.dt0 && !(*cfg.dt0 > 0)) return "dt0 must be > 0";
  if (cfg.t_max && !(*cfg.t_max > 0)) return "t_max must be > 0";
  if (cfg.norm_cap && !(*cfg.norm_cap > 1)) return "norm_cap must be > 1";
  if (cfg.tol_rel && !(*cfg.tol_rel >= 0)) return "tol_rel must be >= 0";
  if (cfg.cone_tol && !(*cfg.cone_tol >= 0)) return "cone_tol must be >= 0";
  if (cfg.tangent_tol && !(*cfg.tangent_tol >= 0)) return "tangent_tol must be >= 0";
  if (cfg.output != "report" && cfg.output != "trajectories" && cfg.output != "both")
    return "output must be report, trajectories, or both";
  if (cfg.workers < 0) return "workers must be >= 0";
  if (cfg.grid_cols < 2 || cfg.grid_rows < 2) return "grid must be at least 2x2";
  if (cfg.grid_near < 0) return "grid near-critical count must be >= 0";
  if (cfg.tangent_grid_edge < 2) return "tangent_grid must be >= 2";
  return {};
}

}  // namespace curvcone
