#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ucn/cli.hpp"
#include "ucn/config.hpp"
#include "ucn/csvio.hpp"
#include "ucn/digest.hpp"

using namespace ucn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ucn_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string sub(const std::string& name) const {
    return (path / name).string();
  }
};

std::string write_tiny_config(const TempDir& tmp, double r_er = 15.0) {
  const std::string path = tmp.sub("tiny.cfg");
  std::ofstream out(path);
  out << "lambda_dbs_max = 0.004\n"
         "area_m2 = 1e5\n"
         "lambda_ue = 0.001\n"
         "error_radius_m = " << r_er << "\n"
         "bins = 2\n"
         "n_cycles = 2\n"
         "kfold_k = 4\n"
         "trials = 1\n"
         "algorithms = ga\n"
         "weight_cases = 0.5\n"
         "ga_generations = 10\n"
         "ga_patience = 5\n"
         "master_seed = 4\n";
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config: empty text yields the documented defaults") {
  const ExperimentConfig c = parse_config_text("");
  CHECK(c.bounds.lambda_min == 0.0005);
  CHECK(c.bounds.lambda_max == 0.0125);
  CHECK(c.bounds.r_sz_min == 10.0);
  CHECK(c.bounds.r_sz_max == 50.0);
  CHECK(c.bounds.p_tx_min == 15.0);
  CHECK(c.bounds.p_tx_max == 30.0);
  CHECK(c.scenario.lambda_ue == 0.0005);
  CHECK(c.scenario.area_m2 == 1e6);
  CHECK(c.radio.error_radius_m == 15.0);
  CHECK(c.radio.shadow_sigma_db == 4.0);
  CHECK(c.ga.pop_size == 24);
  CHECK(c.sa.t0 == 250.0);
  CHECK(c.sa.delta == 0.0001);
  CHECK(c.sa.sigma == 0.01);
  CHECK(c.bins == 10);
  CHECK(c.weight_cases == std::vector<double>{0.25, 0.5, 0.75});
}

TEST_CASE("config: comments and assignment grammar") {
  const ExperimentConfig c = parse_config_text(
      "# a comment\n"
      "\n"
      "bins = 4\n"
      "  master_seed =  7 \n");
  CHECK(c.bins == 4);
  CHECK(c.master_seed == 7);
  CHECK_THROWS(parse_config_text("bins 4\n"));
  CHECK_THROWS(parse_config_text("bins = 4\nbins = 5\n"));
}

TEST_CASE("config: range errors name the key") {
  try {
    parse_config_text("r_sz_min_m = 50\nr_sz_max_m = 10\n");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("r_sz") != std::string::npos);
  }
  try {
    parse_config_text("alpha_se = 1.5\n");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("alpha_se") != std::string::npos);
  }
}

TEST_CASE("config: unknown keys rejected") {
  try {
    parse_config_text("lambda_dbs_mn = 0.001\n");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("lambda_dbs_mn") != std::string::npos);
  }
}

TEST_CASE("config: alpha_se replaces the weight list") {
  const ExperimentConfig c = parse_config_text("alpha_se = 0.75\n");
  CHECK(c.weight_cases == std::vector<double>{0.75});
  CHECK_THROWS(parse_config_text("alpha_se = 0.5\nweight_cases = 0.5\n"));
}

TEST_CASE("cli: unknown subcommand and flags give usage errors") {
  CHECK(run_command({"frobnicate"}) == 2);
  CHECK(run_command({"gen-data", "--bogus-flag", "1"}) == 2);
  CHECK(run_command({}) == 2);
}

TEST_CASE("cli: gen-data reruns produce identical databases") {
  TempDir tmp;
  const std::string cfg = write_tiny_config(tmp);
  CHECK(run_command({"gen-data", "--config", cfg, "--out", tmp.sub("d1")}) ==
        0);
  CHECK(run_command({"gen-data", "--config", cfg, "--out", tmp.sub("d2")}) ==
        0);
  for (const char* f : {"ideal.csv", "erroneous.csv", "residual.csv"}) {
    CHECK(file_digest(tmp.sub("d1") + "/" + f) ==
          file_digest(tmp.sub("d2") + "/" + f));
  }
  CHECK(fs::exists(tmp.sub("d1") + "/manifest.json"));
}

TEST_CASE("cli: optimize without trained models explains the fix") {
  TempDir tmp;
  const std::string cfg = write_tiny_config(tmp);
  // stderr should carry a one-line error mentioning `train`; the exit
  // status is the machine-visible part checked here
  CHECK(run_command({"optimize", "--config", cfg, "--models",
                     tmp.sub("nonexistent"), "--algo", "ga", "--scheme",
                     "ddoec", "--out", tmp.sub("o")}) == 1);
}

TEST_CASE("cli: staged pipeline chains into the experiment layout") {
  TempDir tmp;
  const std::string cfg = write_tiny_config(tmp);
  REQUIRE(run_command({"gen-data", "--config", cfg, "--out",
                       tmp.sub("exp/data")}) == 0);
  REQUIRE(run_command({"train", "--config", cfg, "--data", tmp.sub("exp/data"),
                       "--out", tmp.sub("exp/models")}) == 0);
  REQUIRE(run_command({"optimize", "--config", cfg, "--models",
                       tmp.sub("exp/models"), "--algo", "ga", "--scheme",
                       "ddoec", "--alpha", "0.5", "--trial", "0", "--out",
                       tmp.sub("opt")}) == 0);
  REQUIRE(run_command({"validate", "--config", cfg, "--models",
                       tmp.sub("exp/models"), "--cop", "0.002,20,20",
                       "--alpha", "0.5", "--out", tmp.sub("val")}) == 0);
  CHECK(fs::exists(tmp.sub("opt") + "/result.csv"));
  CHECK(fs::exists(tmp.sub("opt") + "/trace.csv"));
  CHECK(fs::exists(tmp.sub("val") + "/validation.csv"));

  // the full experiment with the same seed reproduces the staged data and
  // models byte for byte
  REQUIRE(run_command({"experiment", "--config", cfg, "--out",
                       tmp.sub("full")}) == 0);
  for (const char* f :
       {"data/ideal.csv", "data/erroneous.csv", "data/residual.csv",
        "models/model_e_ase.json", "models/model_r_ase.json",
        "models/normalizers.kv"}) {
    CHECK_MESSAGE(file_digest(tmp.sub("exp") + "/" + f) ==
                      file_digest(tmp.sub("full") + "/" + f),
                  f);
  }

  // optimize's result row matches the experiment's records row for the
  // same (algorithm, scheme, alpha, trial)
  const auto opt_result = read_csv(tmp.sub("opt") + "/result.csv");
  const auto records = read_csv(tmp.sub("full") + "/records.csv");
  const auto rc = records.column("best_lambda_dbs");
  const auto oc = opt_result.column("best_lambda_dbs");
  const auto rs = records.column("scheme");
  bool matched = false;
  for (const auto& row : records.rows)
    if (row[rs] == "ddoec" && row[rc] == opt_result.rows[0][oc])
      matched = true;
  CHECK(matched);

  // report re-renders the experiment's summary byte-identically
  REQUIRE(run_command({"report", "--in", tmp.sub("full"), "--out",
                       tmp.sub("rep")}) == 0);
  CHECK(file_digest(tmp.sub("full") + "/summary.csv") ==
        file_digest(tmp.sub("rep") + "/summary.csv"));
}

TEST_CASE("cli: experiment produces summary and plots") {
  TempDir tmp;
  const std::string cfg = write_tiny_config(tmp);
  REQUIRE(run_command({"experiment", "--config", cfg, "--out",
                       tmp.sub("exp")}) == 0);
  CHECK(fs::exists(tmp.sub("exp") + "/summary.csv"));
  CHECK(fs::exists(tmp.sub("exp") + "/plots/convergence_ga_0.50.svg"));
  CHECK(fs::exists(tmp.sub("exp") + "/manifest.json"));
}

}  // TEST_SUITE
