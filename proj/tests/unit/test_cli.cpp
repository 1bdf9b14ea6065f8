#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/config.hpp"
#include "cli/csv.hpp"
#include "cli/experiments.hpp"

using namespace helistab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("helistab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_exe(const std::string& args) {
  const int st = std::system((std::string(HELISTAB_EXE) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Config, RoundTrip) {
  ExperimentConfig c;
  c.command = "sweep-threshold";
  c.nu = {1e-2, 3.1622776601683794e-3, 1e-3};
  c.delta = {1.5, 2.0};
  c.seeds = {4, 5};
  c.gamma = {0.01, 0.1};
  c.epsilon = 0.1 / 3;
  c.classifier.residual_energy = 2e-3;
  c.corrupt_operator = true;
  c.inputs = {"a/*.csv", "b.csv"};
  EXPECT_EQ(parse_config(serialize(c)), c);
  EXPECT_EQ(config_hash(parse_config(serialize(c))), config_hash(c));
  ExperimentConfig d = c;
  d.M = 65;
  EXPECT_NE(config_hash(d), config_hash(c));
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("[run]\nout = x\n"), UsageError);
  EXPECT_THROW(parse_config("[run]\ncommand = dns\nbogus = 1\n"), UsageError);
  EXPECT_THROW(parse_config("[run]\ncommand = dns\n[grid]\nM = many\n"), UsageError);
  ExperimentConfig c;
  c.command = "fly";
  EXPECT_THROW(validate(c), UsageError);
  c.command = "dns";
  c.nu = {-1.0};
  EXPECT_THROW(validate(c), UsageError);
}

TEST(Csv, WriteReadAndRaggedRows) {
  const fs::path dir = scratch("csv");
  {
    CsvWriter w((dir / "t.csv").string(), {"family", "x", "n"});
    w.row({std::string("psi"), 0.1, 3LL});
    EXPECT_THROW(w.row({1.0}), std::logic_error);
  }
  const CsvTable t = read_csv((dir / "t.csv").string());
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.column("n"), 2);
  EXPECT_EQ(t.column("missing"), -1);
  EXPECT_DOUBLE_EQ(std::stod(t.rows[0][1]), 0.1);
  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  EXPECT_THROW(read_csv((dir / "bad.csv").string()), std::runtime_error);
}

TEST(Report, NoInputsIsUsageError) {
  ExperimentConfig c;
  c.command = "report";
  c.out = scratch("report_empty").string();
  c.inputs = {c.out + "/*.csv"};
  EXPECT_THROW(report(c), UsageError);
}

TEST(Report, PsiFitAndGrouping) {
  const fs::path dir = scratch("report");
  {
    CsvWriter w((dir / "psi.csv").string(), {"family", "operator", "delta", "k1", "k2", "nu", "psi", "psi_over_sqrt_nu"});
    for (double nu : {1e-2, 1e-3, 1e-4}) w.row({std::string("psi"), std::string("H"), 2.0, 1LL, 0LL, nu, 0.4 * std::sqrt(nu), 0.4});
    CsvWriter v((dir / "audit.csv").string(), {"family", "metric", "value"});
    v.row({std::string("audit"), std::string("product"), 0.5});
    v.row({std::string("audit"), std::string("recovery_third"), 0.1});
    CsvWriter a((dir / "criterion_4.csv").string(), {"criterion", "status", "detail"});
    a.row({4LL, std::string("PASS"), std::string("ok")});
  }
  ExperimentConfig c;
  c.command = "report";
  c.out = dir.string();
  c.inputs = {(dir / "*.csv").string()};
  const auto r = report(c);
  const auto& tables = r.summary["tables"];
  ASSERT_EQ(tables.size(), 3u);  // psi plus two audit metrics
  bool saw_psi = false;
  for (const auto& t : tables)
    if (t["family"] == "psi") {
      saw_psi = true;
      EXPECT_NEAR(t["fits"][0]["slope"].get<double>(), 0.5, 1e-12);
      EXPECT_DOUBLE_EQ(t["fits"][0]["psi_over_sqrt_nu_band"][0].get<double>(), 0.4);
    }
  EXPECT_TRUE(saw_psi);
  EXPECT_EQ(r.summary["criteria"]["4"], "PASS");
  EXPECT_EQ(r.summary["criteria"]["11"], "NOT-RUN");
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Report, HeaderMismatchWithinFamily) {
  const fs::path dir = scratch("report_mismatch");
  {
    CsvWriter a((dir / "a.csv").string(), {"family", "x"});
    a.row({std::string("decay"), 1.0});
    CsvWriter b((dir / "b.csv").string(), {"family", "y"});
    b.row({std::string("decay"), 1.0});
  }
  ExperimentConfig c;
  c.command = "report";
  c.out = dir.string();
  c.inputs = {(dir / "*.csv").string()};
  EXPECT_THROW(report(c), UsageError);
}

TEST(Exe, ExitCodes) {
  EXPECT_EQ(run_exe(""), 1);
  EXPECT_EQ(run_exe("frobnicate"), 1);
  EXPECT_EQ(run_exe("report --out " + scratch("exe_report").string() + " /nonexistent/*.csv"), 1);

  const fs::path dir = scratch("exe");
  EXPECT_EQ(run_exe("verify-linear --nu 1e-2 --delta 2 --M 32 --out " + (dir / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "manifest.json"));

  ExperimentConfig c;
  c.command = "verify-linear";
  c.nu = {1e-2};
  c.M = 32;
  c.corrupt_operator = true;
  c.out = (dir / "bad").string();
  std::ofstream(dir / "bad.ini") << serialize(c);
  EXPECT_EQ(run_exe("--config " + (dir / "bad.ini").string()), 2);
  EXPECT_EQ(run_exe("--config " + (dir / "bad.ini").string() + " --nu 1e-3"), 1);
}

TEST(Exe, DeterministicOutputs) {
  const fs::path dir = scratch("determinism");
  ExperimentConfig c;
  c.command = "audit";
  c.samples = 50;
  c.seed = 3;
  c.jobs = 1;
  for (const char* sub : {"a", "b"}) {
    c.out = (dir / sub).string();
    std::ofstream(dir / (std::string(sub) + ".ini")) << serialize(c);
    ASSERT_EQ(run_exe("--config " + (dir / (std::string(sub) + ".ini")).string()), 0);
  }
  EXPECT_EQ(slurp(dir / "a" / "audit.csv"), slurp(dir / "b" / "audit.csv"));
}
