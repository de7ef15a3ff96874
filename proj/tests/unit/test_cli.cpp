#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef FLUCTLAB_BIN
#error "FLUCTLAB_BIN must point at the fluctlab executable"
#endif
#ifndef FLUCTLAB_CONFIG_DIR
#error "FLUCTLAB_CONFIG_DIR must point at the configs directory"
#endif

namespace fs = std::filesystem;

namespace {

const std::string kScratch = "cli_scratch";

std::string tiny_config() {
  return std::string(FLUCTLAB_CONFIG_DIR) + "/tiny.cfg";
}

/// Runs the CLI with `args`, captures stdout/stderr, returns the exit code.
int run_cli(const std::string& args) {
  fs::create_directories(kScratch);
  const std::string cmd = std::string(FLUCTLAB_BIN) + " " + args + " >" +
                          kScratch + "/stdout.txt 2>" + kScratch +
                          "/stderr.txt";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string last_stdout() {
  std::ifstream in(kScratch + "/stdout.txt");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fresh_dir(const std::string& name) {
  const std::string dir = kScratch + "/" + name;
  fs::remove_all(dir);
  return dir;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  REQUIRE(out.good());
}

}  // namespace

TEST_CASE("help and usage errors use the documented exit codes") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("simulate --help") == 0);
  CHECK(run_cli("frobnicate --out x") == 2);
  CHECK(run_cli("simulate") == 2);  // missing required options
  CHECK(run_cli("simulate --config " + tiny_config() + " --out " +
                fresh_dir("flag") + " --bogus-flag 1") == 2);
  CHECK(run_cli("simulate --config /no/such/file.cfg --out " +
                fresh_dir("miss")) == 2);
}

TEST_CASE("malformed config text is a config error") {
  fs::create_directories(kScratch);
  const std::string bad = kScratch + "/bad.cfg";
  write_file(bad, "[scenario]\nthis is not a key value pair\n");
  CHECK(run_cli("simulate --config " + bad + " --out " + fresh_dir("bad")) ==
        2);
}

TEST_CASE("simulate writes positions, pairings and a manifest") {
  const std::string dir = fresh_dir("sim");
  CHECK(run_cli("simulate --config " + tiny_config() + " --out " + dir) == 0);
  for (const char* name :
       {"positions.bin", "pairings.csv", "summary.json", "manifest.json"})
    CHECK(fs::exists(dir + "/" + name));
}

TEST_CASE("the master seed controls simulate bit-for-bit") {
  const std::string a = fresh_dir("seed_a");
  const std::string b = fresh_dir("seed_b");
  const std::string c = fresh_dir("seed_c");
  REQUIRE(run_cli("simulate --config " + tiny_config() + " --out " + a) == 0);
  REQUIRE(run_cli("simulate --config " + tiny_config() + " --out " + b) == 0);
  REQUIRE(run_cli("simulate --config " + tiny_config() + " --seed 99 --out " +
                  c) == 0);
  CHECK(slurp(a + "/positions.bin") == slurp(b + "/positions.bin"));
  CHECK(slurp(a + "/positions.bin") != slurp(c + "/positions.bin"));
}

TEST_CASE("meanfield writes the mass ledger and final density") {
  const std::string dir = fresh_dir("mf");
  CHECK(run_cli("meanfield --config " + tiny_config() + " --out " + dir) == 0);
  CHECK(fs::exists(dir + "/mass.csv"));
  CHECK(fs::exists(dir + "/density.bin"));
}

TEST_CASE("spde runs a replica ensemble under one common-noise path") {
  const std::string dir = fresh_dir("spde");
  CHECK(run_cli("spde --config " + tiny_config() + " --runs 3 --out " + dir) ==
        0);
  const auto csv = slurp(dir + "/pairings.csv");
  CHECK(csv.find("t,run,phi_name,pairing_value") == 0);
  CHECK(csv.find(",2,") != std::string::npos);  // third replica present
}

TEST_CASE("converge emits norms, verdicts, and reproducible artifacts") {
  const std::string a = fresh_dir("conv_a");
  const int code = run_cli("converge --config " + tiny_config() + " --out " + a);
  CHECK((code == 0 || code == 1));  // tiny stats may miss the slope bands
  CHECK(fs::exists(a + "/norms.csv"));
  const auto out = last_stdout();
  CHECK(out.find("plain_p2_slope") != std::string::npos);
  CHECK(out.find("bilinear_p1_slope") != std::string::npos);

  const std::string b = fresh_dir("conv_b");
  REQUIRE(run_cli("converge --config " + tiny_config() + " --out " + b) ==
          code);
  CHECK(slurp(a + "/norms.csv") == slurp(b + "/norms.csv"));

  // A finished run dir renders to a report; tampering is refused.
  CHECK(run_cli("report --out " + a) == 0);
  CHECK(fs::exists(a + "/report.md"));
  std::ofstream(a + "/norms.csv", std::ios::app) << "tampered\n";
  CHECK(run_cli("report --out " + a) == 2);
}

TEST_CASE("report on a missing directory is an io error") {
  CHECK(run_cli("report --out " + fresh_dir("nothing")) == 2);
}

TEST_CASE("statistical campaigns refuse configs below their sample floors") {
  // tiny.cfg has R = 4: far below the conditional-CLT replica floor.
  CHECK(run_cli("clt --config " + tiny_config() + " --out " +
                fresh_dir("clt")) == 2);
  // Largest pooled sample is R * max N = 320 < 10^4.
  CHECK(run_cli("entropy --config " + tiny_config() + " --out " +
                fresh_dir("ent")) == 2);
}

TEST_CASE("elln and increments run end to end on the tiny scenario") {
  const std::string e = fresh_dir("elln");
  const int ecode = run_cli("elln --config " + tiny_config() + " --out " + e);
  CHECK((ecode == 0 || ecode == 1));
  CHECK(fs::exists(e + "/elln.csv"));
  CHECK(last_stdout().find("elln_p4_flat") != std::string::npos);

  const std::string i = fresh_dir("inc");
  const int icode =
      run_cli("increments --config " + tiny_config() + " --out " + i);
  CHECK((icode == 0 || icode == 1));
  CHECK(fs::exists(i + "/increments.csv"));
  CHECK(last_stdout().find("increment_p4_slope") != std::string::npos);
}

TEST_CASE("crossterms reports covariance and orthogonality verdicts") {
  const std::string dir = fresh_dir("cross");
  const int code =
      run_cli("crossterms --config " + tiny_config() + " --out " + dir);
  CHECK((code == 0 || code == 1));
  CHECK(fs::exists(dir + "/martingales.csv"));
  const auto out = last_stdout();
  CHECK(out.find("cov_") != std::string::npos);
  CHECK(out.find("cross_product_") != std::string::npos);
}

TEST_CASE("a drift-dominated scenario fails the increment scaling verdict") {
  fs::create_directories(kScratch);
  const std::string cfg = kScratch + "/drifty.cfg";
  write_file(cfg,
             "[scenario]\n"
             "d = 1\n"
             "N_list = [80]\n"
             "T = 0.05\n"
             "n_steps = 4\n"
             "L = 8\n"
             "M = 64\n"
             "Xi = 16\n"
             "M_f = 64\n"
             "alpha_interaction = 2.6\n"
             "R = 4\n"
             "seed = 5\n"
             "\n"
             "[kernel]\n"
             "variant = gaussian\n"
             "amplitude = 2.0\n"
             "width = 1.0\n"
             "\n"
             "[sigma]\n"
             "variant = constant\n"
             "identity_scale = 0.01\n"
             "\n"
             "[nu]\n"
             "variant = constant\n"
             "identity_scale = 0.01\n"
             "\n"
             "[increments]\n"
             "lag_fractions = [0.25, 0.5, 1.0]\n");
  const std::string dir = fresh_dir("drifty");
  CHECK(run_cli("increments --config " + cfg + " --out " + dir) == 1);
  const auto out = last_stdout();
  CHECK(out.find("FAIL  increment_p4_slope") != std::string::npos);
  CHECK(out.find("VERDICT FAILURE") != std::string::npos);
}

TEST_CASE("a blown-up density solve aborts with the numerical exit code") {
  fs::create_directories(kScratch);
  const std::string cfg = kScratch + "/unstable.cfg";
  write_file(cfg,
             "[scenario]\n"
             "d = 1\n"
             "N_list = [50]\n"
             "T = 1.0\n"
             "n_steps = 4\n"
             "L = 8\n"
             "M = 64\n"
             "Xi = 16\n"
             "M_f = 64\n"
             "R = 4\n"
             "seed = 1\n"
             "\n"
             "[kernel]\n"
             "variant = gaussian\n"
             "amplitude = 200.0\n"
             "width = 0.5\n"
             "\n"
             "[sigma]\n"
             "variant = constant\n"
             "identity_scale = 0.1\n"
             "\n"
             "[nu]\n"
             "variant = constant\n"
             "identity_scale = 0.0\n"
             "\n"
             "[rho0]\n"
             "variant = gaussian_mixture\n"
             "mean = [0.0]\n"
             "sd = 0.5\n");
  const std::string dir = fresh_dir("unstable");
  CHECK(run_cli("meanfield --config " + cfg + " --out " + dir) == 3);
}
