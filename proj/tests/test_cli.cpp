#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "curvcone/reporting.hpp"
#include "curvcone/run_config.hpp"
#include "curvcone/runner.hpp"

using curvcone::RunConfig;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("curvcone-test-" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig tiny_config(const std::string& experiment, const fs::path& out) {
  RunConfig cfg;
  cfg.experiment = experiment;
  cfg.dims = {3};
  cfg.trials = 6;
  cfg.samples = 30;
  cfg.spectra = 40;
  cfg.seed = 7;
  cfg.t_max = 0.5;
  cfg.grid_cols = 10;
  cfg.grid_rows = 10;
  cfg.grid_near = 5;
  cfg.tangent_grid_edge = 3;
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace

TEST_CASE("flag value parsing helpers", "[cli]") {
  CHECK(curvcone::parse_int_list("3") == std::vector<int>{3});
  CHECK(curvcone::parse_int_list("3,4,5") == std::vector<int>{3, 4, 5});
  int c = 0, r = 0, k = 0;
  curvcone::parse_grid_spec("50x50+20", c, r, k);
  CHECK(c == 50);
  CHECK(r == 50);
  CHECK(k == 20);
  k = 3;
  curvcone::parse_grid_spec("8x9", c, r, k);
  CHECK(c == 8);
  CHECK(r == 9);
  CHECK(k == 3);  // untouched
  CHECK_THROWS_AS(curvcone::parse_grid_spec("50", c, r, k), std::invalid_argument);
}

TEST_CASE("config file sections and precedence", "[cli]") {
  const std::string text =
      "# defaults for everything\n"
      "seed = 5\n"
      "trials = 11\n"
      "\n"
      "[invariance]\n"
      "trials = 22\n"
      "lambda1 = 1\n"
      "lambda2 = 0\n"
      "\n"
      "[set-identity]\n"
      "spectra = 33\n";

  RunConfig inv;
  inv.experiment = "invariance";
  std::istringstream in1(text);
  curvcone::load_config_stream(inv, in1, inv.experiment);
  CHECK(inv.seed == 5);
  CHECK(inv.trials == 22);  // section overrides global
  CHECK(inv.lambda1.has_value());
  CHECK(inv.spectra == 1000);  // other section ignored

  RunConfig si;
  si.experiment = "set-identity";
  std::istringstream in2(text);
  curvcone::load_config_stream(si, in2, si.experiment);
  CHECK(si.trials == 11);
  CHECK(si.spectra == 33);
  CHECK_FALSE(si.lambda1.has_value());

  RunConfig bad;
  std::istringstream in3("nonsense = 1\n");
  CHECK_THROWS_AS(curvcone::load_config_stream(bad, in3, "all"),
                  std::invalid_argument);
  std::istringstream in4("key with no equals\n");
  CHECK_THROWS_AS(curvcone::load_config_stream(bad, in4, "all"),
                  std::invalid_argument);
}

TEST_CASE("validation names the violated constraint", "[cli]") {
  RunConfig cfg;
  cfg.experiment = "invariance";
  cfg.lambda1 = 0.5;
  cfg.lambda2 = 0.9;
  const std::string msg = curvcone::validate_run_config(cfg);
  CHECK(msg.find("lambda2 <= lambda1 violated") != std::string::npos);

  cfg.lambda2.reset();
  CHECK(curvcone::validate_run_config(cfg) ==
        "lambda1 and lambda2 must be given together");

  RunConfig unknown;
  unknown.experiment = "frobnicate";
  CHECK(curvcone::validate_run_config(unknown).find("unknown experiment") == 0);

  RunConfig bad_out;
  bad_out.output = "pdf";
  CHECK_FALSE(curvcone::validate_run_config(bad_out).empty());

  RunConfig fine;
  fine.experiment = "trace";
  CHECK(curvcone::validate_run_config(fine).empty());
}

TEST_CASE("run dispatches all experiments and writes a manifest", "[cli]") {
  const fs::path out = fresh_dir("all");
  RunConfig cfg = tiny_config("all", out);
  std::ostringstream os, es;
  const int code = curvcone::run(cfg, os, es);
  INFO(es.str());
  CHECK(code == 0);

  long reports = 0;
  for (const auto& entry : fs::directory_iterator(out))
    if (entry.path().string().ends_with(".report.txt")) ++reports;
  CHECK(reports == 4);

  const std::string manifest = slurp(out / "manifest.txt");
  for (const char* name : {"invariance", "tangent-cone", "set-identity", "trace"})
    CHECK(manifest.find(name) != std::string::npos);

  // manifest hashes match the emitted bytes
  std::istringstream lines(manifest);
  std::string line;
  long checked = 0;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    REQUIRE(eq != std::string::npos);
    const std::string fname = line.substr(5, eq - 5);  // strip "file."
    const std::string hash = line.substr(eq + 3);
    CHECK(curvcone::fnv1a64_hex(slurp(out / fname)) == hash);
    ++checked;
  }
  CHECK(checked == reports);
  fs::remove_all(out);
}

TEST_CASE("run rejects parameters outside the region with status 2", "[cli]") {
  const fs::path out = fresh_dir("bad-params");
  RunConfig cfg = tiny_config("invariance", out);
  cfg.lambda1 = 0.5;
  cfg.lambda2 = 0.9;
  std::ostringstream os, es;
  CHECK(curvcone::run(cfg, os, es) == 2);
  CHECK(es.str().find("lambda2 <= lambda1 violated") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("run reports unwritable output locations with status 2", "[cli]") {
  RunConfig cfg = tiny_config("trace", "/proc/curvcone-cannot-write-here");
  std::ostringstream os, es;
  CHECK(curvcone::run(cfg, os, es) == 2);
  CHECK(es.str().find("config error") != std::string::npos);
}

TEST_CASE("reports are byte-identical across parallelism", "[cli]") {
  const fs::path out1 = fresh_dir("par1");
  const fs::path out8 = fresh_dir("par8");
  RunConfig c1 = tiny_config("invariance", out1);
  c1.workers = 1;
  RunConfig c8 = tiny_config("invariance", out8);
  c8.workers = 8;
  std::ostringstream os, es;
  REQUIRE(curvcone::run(c1, os, es) == 0);
  REQUIRE(curvcone::run(c8, os, es) == 0);

  const std::string fname = "invariance_n3_l1_rand_seed7.report.txt";
  const std::string a = slurp(out1 / fname);
  const std::string b = slurp(out8 / fname);
  REQUIRE_FALSE(a.empty());
  CHECK(a == b);
  fs::remove_all(out1);
  fs::remove_all(out8);
}

#ifdef CURVCONE_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(CURVCONE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("binary runs the documented invocations", "[cli]") {
  const fs::path out = fresh_dir("bin");
  CHECK(run_cli("run invariance --n 3 --lambda1 1 --lambda2 0 --trials 100 --seed 7"
                " --t-max 0.5 --out " +
                out.string()) == 0);
  long reports = 0;
  for (const auto& entry : fs::directory_iterator(out))
    if (entry.path().string().ends_with(".report.txt")) ++reports;
  CHECK(reports == 1);
  fs::remove_all(out);

  // lambda pair outside the region: configuration error
  CHECK(run_cli("run invariance --lambda1 0.5 --lambda2 0.9") == 2);
  // parse errors are configuration errors too
  CHECK(run_cli("run invariance --no-such-flag") == 2);
  CHECK(run_cli("run frobnicate") == 2);
}

TEST_CASE("binary honors the output directory environment override", "[cli]") {
  const fs::path out = fresh_dir("env");
  setenv("CURVCONE_OUT", out.string().c_str(), 1);
  const int code =
      run_cli("run trace --n 3 --samples 20 --seed 3");
  unsetenv("CURVCONE_OUT");
  CHECK(code == 0);
  CHECK(fs::exists(out / "manifest.txt"));
  fs::remove_all(out);
}

TEST_CASE("binary reads sectioned config files with flag precedence", "[cli]") {
  const fs::path out = fresh_dir("cfgfile");
  const fs::path cfg_path = out / "run.cfg";
  fs::create_directories(out);
  {
    std::ofstream f(cfg_path);
    f << "seed = 9\n[trace]\nn = 3\nsamples = 15\n";
  }
  // flag overrides the file's samples; file supplies seed and dims
  CHECK(run_cli("run trace --config " + cfg_path.string() + " --samples 10 --out " +
                (out / "res").string()) == 0);
  bool found = false;
  for (const auto& entry : fs::directory_iterator(out / "res")) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("trace_") && name.ends_with("_seed9.report.txt")) {
      found = true;
      const std::string text = slurp(entry.path());
      CHECK(text.find("config.identity_samples = 10") != std::string::npos);
    }
  }
  CHECK(found);
  fs::remove_all(out);
}
#endif

TEST_CASE("trajectory output writes one file per trial", "[cli]") {
  const fs::path out = fresh_dir("traj");
  RunConfig cfg = tiny_config("invariance", out);
  cfg.output = "both";
  std::ostringstream os, es;
  REQUIRE(curvcone::run(cfg, os, es) == 0);
  long traj = 0;
  for (const auto& entry : fs::directory_iterator(out))
    if (entry.path().string().ends_with(".traj.txt")) ++traj;
  CHECK(traj == cfg.trials);
  // trajectory files are listed in the manifest
  const std::string manifest = slurp(out / "manifest.txt");
  CHECK(manifest.find(".traj.txt") != std::string::npos);
  fs::remove_all(out);
}
