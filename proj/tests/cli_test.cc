#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "expocol/cli.h"

namespace expocol {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("expocol_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string config(const std::string& body, const std::string& name = "cfg.json") {
    const auto p = dir_ / name;
    std::ofstream(p) << body;
    return p.string();
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), kExitUsage);
  EXPECT_EQ(run({"run"}), kExitUsage);
  EXPECT_EQ(run({"run", "--config", config("{}"), "--jobs", "0"}), kExitUsage);
  EXPECT_EQ(run({"--help"}), kExitOk);
  EXPECT_NE(out_.str().find("converge"), std::string::npos);
}

TEST_F(CliTest, ConfigErrors) {
  EXPECT_EQ(run({"run", "--config", config("")}), kExitUsage);
  EXPECT_NE(err_.str().find("parse error"), std::string::npos);
  EXPECT_EQ(run({"run", "--config", config(R"({"problem": "test_one", "bogus": 1})")}), kExitUsage);
  EXPECT_NE(err_.str().find("bogus"), std::string::npos);
  EXPECT_EQ(run({"run", "--config", (dir_ / "missing.json").string()}), kExitUsage);
  EXPECT_EQ(run({"run", "--config", config(R"({"problem": "test_one", "grid": {"n": 7}})")}), kExitUsage);
}

TEST_F(CliTest, RunWithOverrides) {
  const auto cfg = config(R"({"problem": "test_one", "stepsizes": [0.01], "t_end": 0.1})");
  const auto out = (dir_ / "res").string();
  EXPECT_EQ(run({"run", "--config", cfg, "--out", out, "--method", "strang,ecm3", "--override",
                 "t_end=0.2"}),
            kExitOk);
  EXPECT_NE(out_.str().find("run: strang"), std::string::npos) << out_.str();
  EXPECT_NE(out_.str().find("steps=20"), std::string::npos) << out_.str();
  EXPECT_TRUE(fs::exists(dir_ / "res" / "run.csv"));
}

TEST_F(CliTest, Divergence) {
  const auto cfg = config(R"({"problem": "test_two", "stepsizes": [10], "t_end": 50})");
  EXPECT_EQ(run({"run", "--config", cfg, "--out", (dir_ / "o").string()}), kExitDivergence);
  EXPECT_NE(err_.str().find("step 1"), std::string::npos) << err_.str();
}

TEST_F(CliTest, ReferenceWorkflow) {
  const auto cfg = config(R"({"problem": "test_two", "grid": {"n": 32}, "stepsizes": [0.05, 0.025],
                              "t_end": 0.2, "methods": ["ecm2", "strang"]})");
  const auto out = (dir_ / "o").string();
  EXPECT_EQ(run({"converge", "--config", cfg, "--out", out}), kExitMissingReference);
  EXPECT_EQ(run({"compare", "--config", cfg, "--out", out}), kExitMissingReference);
  EXPECT_EQ(run({"reference", "--config", cfg, "--out", out}), kExitOk);
  EXPECT_NE(out_.str().find("computed"), std::string::npos);
  EXPECT_EQ(run({"reference", "--config", cfg, "--out", out}), kExitOk);
  EXPECT_NE(out_.str().find("cache hit"), std::string::npos);
  EXPECT_EQ(run({"converge", "--config", cfg, "--out", out}), kExitOk);
  EXPECT_EQ(run({"compare", "--config", cfg, "--out", out, "--jobs", "2"}), kExitOk);
  EXPECT_EQ(run({"drift", "--config", cfg, "--out", out, "--plot"}), kExitOk);
  for (const char* f : {"converge.csv", "compare.csv", "drift.csv", "drift_summary.csv", "drift.gp"}) {
    EXPECT_TRUE(fs::exists(dir_ / "o" / f)) << f;
  }
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(NLS_EXPOCOL_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, BinaryExitCodes) {
  const auto ok = config(R"({"problem": "plane_wave", "stepsizes": [0.1, 0.05]})", "pw.json");
  const auto out = (dir_ / "bin").string();
  EXPECT_EQ(run_binary("converge --config " + ok + " --out " + out), kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "bin" / "converge.csv"));
  EXPECT_EQ(run_binary("converge"), kExitUsage);
  EXPECT_EQ(run_binary("run --config " + config("", "empty.json")), kExitUsage);
  const auto diverge = config(R"({"problem": "test_two", "stepsizes": [10], "t_end": 50})", "d.json");
  EXPECT_EQ(run_binary("run --config " + diverge + " --out " + out), kExitDivergence);
  const auto noref = config(R"({"problem": "test_two", "t_end": 0.1})", "n.json");
  EXPECT_EQ(run_binary("converge --config " + noref + " --out " + out), kExitMissingReference);
}

}  // namespace
}  // namespace expocol
