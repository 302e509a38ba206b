#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  const auto dir = fs::temp_directory_path() / "rerm_cli_test";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p);
  f << content;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RERM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

int count_lines(const fs::path& p) {
  std::ifstream f(p);
  int n = 0;
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) ++n;
  return n;
}

}  // namespace

TEST(Cli, SweepProducesRecords) {
  const auto dir = workdir();
  write_file(dir / "sweep.json", R"({
    "grid": {"N": [20, 40, 60], "dim": [5], "rho": [1.0]},
    "trials_per_cell": 5,
    "regularizer": {"kind": "l1"},
    "design": {"law": "gaussian-isotropic"},
    "target": {"kind": "dense-spread"},
    "noise": {"law": "gaussian", "scale": 0.5},
    "lambda_policy": {"kind": "fixed", "value": 0.05},
    "master_seed": 7
  })");
  const int rc = run_cli("sweep --config " + (dir / "sweep.json").string() + " --out-dir " +
                         (dir / "out").string());
  EXPECT_EQ(rc, 0);
  EXPECT_EQ(count_lines(dir / "out" / "records.csv"), 16);  // header + 15 records
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "cells.csv"));
  fs::remove_all(dir);
}

TEST(Cli, ConfigErrorExitsTwo) {
  const auto dir = workdir();
  write_file(dir / "bad.json", R"({"grid": {"N": [10]}})");
  EXPECT_EQ(run_cli("sweep --config " + (dir / "bad.json").string()), 2);
  write_file(dir / "notjson.json", "not json at all {");
  EXPECT_EQ(run_cli("sweep --config " + (dir / "notjson.json").string()), 2);
  fs::remove_all(dir);
}

TEST(Cli, SolveCalibrateDiagnoseRates) {
  const auto dir = workdir();
  write_file(dir / "solve.json", R"({
    "problem": {
      "design": {"law": "gaussian-isotropic", "shape": {"kind": "vector", "d": 6}},
      "target": {"kind": "sparse", "s": 2, "magnitude": 1.0},
      "noise": {"law": "gaussian", "scale": 0.3},
      "N": 60, "seed": 3
    },
    "regularizer": {"kind": "l1"},
    "lambda": 0.1
  })");
  EXPECT_EQ(run_cli("solve --config " + (dir / "solve.json").string() + " --out-dir " +
                    (dir / "s").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "s" / "solution.json"));
  EXPECT_TRUE(fs::exists(dir / "s" / "trace.csv"));

  write_file(dir / "calib.json", R"({
    "regularizer": {"kind": "l1"},
    "shape": {"kind": "vector", "d": 50},
    "N": 200,
    "sigma_q": 1.0,
    "rho_grid": [0.5, 1.0, 2.0],
    "mc_samples": 2000,
    "width_table": {"dims": [16, 64], "mc_samples": 1000}
  })");
  EXPECT_EQ(run_cli("calibrate --config " + (dir / "calib.json").string() + " --out-dir " +
                    (dir / "c").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "c" / "calibration.json"));
  EXPECT_EQ(count_lines(dir / "c" / "width_table.csv"), 3);

  write_file(dir / "diag.json", R"({
    "design": {"law": "gaussian-isotropic", "shape": {"kind": "vector", "d": 4}},
    "N": 5000, "kappa": 0.5, "directions": 10, "p0": 6.0, "seed": 2
  })");
  EXPECT_EQ(run_cli("diagnose --config " + (dir / "diag.json").string() + " --out-dir " +
                    (dir / "d").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "d" / "diagnostics.json"));

  write_file(dir / "rates.json", R"({
    "queries": [
      {"type": "minimax-l1", "rho": 1.0, "sigma": 1.0, "N": 100, "d": 50},
      {"type": "combined", "s": 2, "rho": 1.0, "sigma": 1.0, "N": 100, "d": 50},
      {"type": "complexity", "regularizer": {"kind": "l1"},
       "shape": {"kind": "vector", "d": 50}, "N": 100, "sigma_q": 1.0, "rho": 1.0}
    ]
  })");
  EXPECT_EQ(run_cli("rates --config " + (dir / "rates.json").string() + " --out-dir " +
                    (dir / "r").string()),
            0);
  EXPECT_EQ(count_lines(dir / "r" / "rates.csv"), 4);
  fs::remove_all(dir);
}

TEST(Cli, PartialSolverFailureExitsThree) {
  // student-t noise with dof <= q passes config parsing (the spec is stored,
  // not constructed) and fails per trial inside the workers.
  const auto dir = workdir();
  write_file(dir / "fail.json", R"({
    "grid": {"N": [20], "dim": [4], "rho": [1.0]},
    "trials_per_cell": 2,
    "regularizer": {"kind": "l1"},
    "design": {"law": "gaussian-isotropic"},
    "target": {"kind": "dense-spread"},
    "noise": {"law": "student-t", "scale": 1.0, "dof": 3.0, "q": 4.0},
    "lambda_policy": {"kind": "fixed", "value": 0.1},
    "master_seed": 1, "emit_report": false
  })");
  EXPECT_EQ(run_cli("sweep --config " + (dir / "fail.json").string() + " --out-dir " +
                    (dir / "f").string()),
            3);
  EXPECT_EQ(count_lines(dir / "f" / "records.csv"), 3);  // header + 2 failed records
  fs::remove_all(dir);
}

TEST(Cli, ReportFromRecords) {
  const auto dir = workdir();
  write_file(dir / "sweep.json", R"({
    "grid": {"N": [20, 40], "dim": [5], "rho": [1.0]},
    "trials_per_cell": 3,
    "regularizer": {"kind": "l1"},
    "design": {"law": "gaussian-isotropic"},
    "target": {"kind": "dense-spread"},
    "noise": {"law": "gaussian", "scale": 0.5},
    "lambda_policy": {"kind": "fixed", "value": 0.05},
    "master_seed": 9,
    "emit_report": false
  })");
  ASSERT_EQ(run_cli("sweep --config " + (dir / "sweep.json").string() + " --out-dir " +
                    (dir / "out").string()),
            0);
  EXPECT_EQ(run_cli("report --records " + (dir / "out" / "records.csv").string() +
                    " --out-dir " + (dir / "rep").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "rep" / "cells.csv"));
  EXPECT_TRUE(fs::exists(dir / "rep" / "summary.json"));
  fs::remove_all(dir);
}
