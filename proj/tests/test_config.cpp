#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "plap/config.hpp"

using namespace plap;

TEST(Config, FlagsGiveBallConfig) {
  const RunConfig c = parse_config({"shoot", "--p", "2", "--N", "3", "--R1", "0", "--R2", "5", "--q", "4", "--r", "2"});
  EXPECT_EQ(c.subcommand, "shoot");
  EXPECT_EQ(c.kind, "ball");
  EXPECT_EQ(c.p, 2.0);
  EXPECT_EQ(c.N, 3);
  EXPECT_EQ(c.R2, 5.0);
  EXPECT_TRUE(c.domain().is_ball());
}

TEST(Config, BallWithInnerRadiusIsError) {
  EXPECT_THROW(parse_config({"shoot", "--R1", "1", "--R2", "2", "--kind", "ball"}), ConfigError);
}

TEST(Config, KindInferredFromR1) {
  EXPECT_EQ(parse_config({"eigen", "--R1", "1", "--R2", "2"}).kind, "annulus");
  EXPECT_THROW(parse_config({"eigen", "--R1", "0", "--R2", "2", "--kind", "annulus"}), ConfigError);
}

TEST(Config, FlagOverridesFile) {
  const auto path = std::filesystem::temp_directory_path() / "plap_cfg_test.txt";
  {
    std::ofstream f(path);
    f << "# test file\n"
         "subcommand = solve\n"
         "p = 3   # trailing comment\n"
         "R2 = 4\n"
         "\n"
         "k = 2\n";
  }
  const RunConfig c = parse_config({"solve", "--config", path.string(), "--p", "2.5"});
  EXPECT_EQ(c.p, 2.5);
  EXPECT_EQ(c.R2, 4.0);
  EXPECT_EQ(c.k, 2);
  // the command line names the subcommand
  EXPECT_EQ(parse_config({"scan", "--config", path.string()}).subcommand, "scan");
  std::filesystem::remove(path);
}

TEST(Config, TextRoundTripIsByteIdentical) {
  RunConfig c;
  c.subcommand = "solve";
  c.p = 1.0 / 0.7;
  c.R2 = 0.1 + 0.2;
  c.d = 4.335052676;
  c.tol = 3.3e-13;
  c.epsilon = 0.1;
  c.eta = 2.0 / 3.0;
  c.out = "runs/a b";
  c.svg = true;
  const std::string t = to_text(c);
  const RunConfig back = build_config(parse_config_text(t));
  EXPECT_EQ(back, c);
  EXPECT_EQ(to_text(back), t);

  const RunConfig ann = parse_config({"eigen", "--R1", "0.25", "--R2", "1.75", "--N", "2", "--kmax", "7"});
  EXPECT_EQ(to_text(build_config(parse_config_text(to_text(ann)))), to_text(ann));
}

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  EXPECT_EQ(build_config(parse_config_text(to_text(c))), c);
}

TEST(Config, RejectsUnknownAndMalformed) {
  EXPECT_THROW(parse_config_text("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("p 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("p = 2\np = 3\n"), ConfigError);
  EXPECT_THROW(build_config(parse_config_text("p = 2x\n")), ConfigError);
  EXPECT_THROW(build_config(parse_config_text("N = 2.5\n")), ConfigError);
  EXPECT_THROW(build_config(parse_config_text("svg = maybe\n")), ConfigError);
  EXPECT_THROW(build_config(parse_config_text("subcommand = frobnicate\n")), ConfigError);
  EXPECT_THROW(build_config(parse_config_text("p = 1\n")), ConfigError);
  EXPECT_THROW(build_config(parse_config_text("suite = none\n")), ConfigError);
  EXPECT_THROW(parse_config({"shoot", "--bogus", "1"}), ConfigError);
  EXPECT_THROW(parse_config({}), ConfigError);
  EXPECT_THROW(parse_config({"shoot", "--config", "/nonexistent/plap.cfg"}), ConfigError);
}

TEST(Config, ErrorMentionsLine) {
  try {
    parse_config_text("p = 2\n\nwhat = 1\n", "f.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f.cfg:3"), std::string::npos) << e.what();
  }
}

TEST(Config, ProblemFromConfig) {
  const RunConfig c = parse_config({"solve", "--p", "3", "--q", "4", "--r", "3", "--R2", "5"});
  const Problem pb = c.problem();
  EXPECT_EQ(pb.p(), 3.0);
  EXPECT_EQ(pb.domain.R2, 5.0);
  // q >= p* on a ball is rejected by the problem, not by the parser
  const RunConfig bad = parse_config({"solve", "--p", "2", "--q", "7", "--r", "2"});
  EXPECT_THROW(bad.problem(), DomainError);
}
