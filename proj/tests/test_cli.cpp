#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "plap/cli.hpp"

using namespace plap;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream o, e;
  const int c = run_cli(args, o, e);
  return {c, o.str(), e.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = std::filesystem::temp_directory_path() /
          ("plap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir);
  }
  void TearDown() override { std::filesystem::remove_all(dir); }
  std::string sub(const std::string& s) const { return (dir / s).string(); }
  std::filesystem::path dir;
};

const std::vector<std::string> kCrit7 = {"--p", "2", "--N", "3", "--R2", "5", "--q", "4", "--r", "2"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_F(CliTest, HelpExitsZero) {
  const Outcome r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("solve"), std::string::npos);
  EXPECT_NE(r.out.find("--R2"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({"shoot", "--R1", "1", "--R2", "2", "--kind", "ball"}).code, exit_config);
  EXPECT_EQ(run({"shoot", "--bogus", "3"}).code, exit_config);
  EXPECT_EQ(run({}).code, exit_config);
  EXPECT_EQ(run({"solve", "--q", "7", "--r", "2", "--p", "2"}).code, exit_config);  // q >= p* on a ball
}

TEST_F(CliTest, NumericFailureExitsThree) {
  // the state overflows for this datum
  EXPECT_EQ(run({"shoot", "--d", "1e300", "--R2", "5", "--out", sub("o")}).code, exit_numeric);
}

TEST_F(CliTest, UnwritableOutputExitsTwo) {
  EXPECT_EQ(run({"shoot", "--out", "/proc/plap_no_dir"}).code, exit_config);
}

TEST_F(CliTest, ShootWritesCsvAndSvg) {
  const Outcome r = run(with({"shoot", "--d", "3", "--svg", "--out", sub("s")}, kCrit7));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "s" / "trajectory.csv").rfind("r,u,uprime,v,H,rho,theta\n", 0), 0u);
  EXPECT_NE(slurp(dir / "s" / "phase.svg").find("<polyline"), std::string::npos);
  // the saved config reproduces the run
  const RunConfig saved = build_config(read_config_file(sub("s/config.txt")));
  EXPECT_EQ(saved.d, 3.0);
  EXPECT_EQ(saved.R2, 5.0);
}

TEST_F(CliTest, PlotOnlyWritesSvg) {
  ASSERT_EQ(run({"plot", "--d", "1", "--out", sub("p")}).code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "p" / "phase.svg"));
  EXPECT_FALSE(std::filesystem::exists(dir / "p" / "trajectory.csv"));
}

TEST_F(CliTest, EigenCsv) {
  ASSERT_EQ(run({"eigen", "--N", "1", "--p", "2", "--R2", "1", "--kmax", "3", "--profiles", "--out", sub("e")}).code,
            0);
  const std::string csv = slurp(dir / "e" / "eigen.csv");
  EXPECT_EQ(csv.rfind("k,lambda\n1,0.0000000000000000e+00\n2,9.86960", 0), 0u) << csv;
  EXPECT_TRUE(std::filesystem::exists(dir / "e" / "eigenfunction_3.csv"));
}

TEST_F(CliTest, SolveIsDeterministicAndReplaysFromConfig) {
  ASSERT_EQ(run(with({"solve", "--out", sub("a")}, kCrit7)).code, 0);
  ASSERT_EQ(run(with({"solve", "--out", sub("b")}, kCrit7)).code, 0);
  const std::string sol = slurp(dir / "a" / "solutions.csv");
  EXPECT_EQ(sol.rfind("d,side,branch,j,residual,umin,umax\n", 0), 0u);
  for (const auto& e : std::filesystem::directory_iterator(dir / "a")) {
    if (e.path().filename() == "config.txt") continue;
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
  }
  // replay from the saved text form into a third directory
  ASSERT_EQ(run({"solve", "--config", sub("a/config.txt"), "--out", sub("c")}).code, 0);
  EXPECT_EQ(slurp(dir / "c" / "solutions.csv"), sol);
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "profile_000_below_j1.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "scan.csv"));
}

TEST_F(CliTest, ScanWritesFinalAngles) {
  ASSERT_EQ(run(with({"scan", "--grid", "32", "--out", sub("s")}, kCrit7)).code, 0);
  const std::string csv = slurp(dir / "s" / "scan.csv");
  EXPECT_EQ(csv.rfind("d,thetaR2\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 65);
}

TEST_F(CliTest, VerifyPtrigPasses) {
  const Outcome r = run({"verify", "--suite", "ptrig"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST_F(CliTest, VerifyFailureExitsOne) {
  EXPECT_FALSE(SuiteReport{}.ok());
  // with N = 3 the chain needs l* far below the default candidate range
  const Outcome r = run({"verify", "--suite", "appendix", "--p", "1.5", "--N", "3", "--q", "2.5", "--r", "2"});
  EXPECT_EQ(r.code, exit_verify);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  const Outcome ok = run({"verify", "--suite", "appendix", "--p", "1.5", "--N", "1", "--q", "2.5", "--r", "2"});
  EXPECT_EQ(ok.code, exit_ok) << ok.out;
}

TEST_F(CliTest, CheckF) {
  const Outcome r = run({"check-f", "--p", "2", "--N", "3", "--q", "4", "--r", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("(f_subc): verified-on-grid"), std::string::npos);
  EXPECT_NE(r.out.find("C1 = 2"), std::string::npos);
}
