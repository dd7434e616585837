#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "isolab/cli.hpp"

using namespace isolab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "iso_lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("isolab_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, SelftestPasses) {
  const auto dir = temp_dir("selftest");
  const auto r = run({"selftest", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "selftest.json"));
}

TEST(Cli, SelftestCatchesEachInjectedFault) {
  for (const auto& fault : known_faults()) {
    const auto dir = temp_dir("fault_" + fault);
    const auto r = run({"selftest", "--inject-fault", fault, "--out", dir.string()});
    EXPECT_EQ(r.code, 1) << fault;
    EXPECT_NE(r.out.find("FAIL numerics/" + fault), std::string::npos) << fault << '\n' << r.out;
  }
  EXPECT_EQ(run({"selftest", "--inject-fault", "nope", "--out", temp_dir("nope").string()}).code, 2);
}

TEST(Cli, VerifyGaussianAndTruncated) {
  const auto dir = temp_dir("verify");
  auto r = run({"verify", "--measure", "gaussian", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const auto j = Json::parse(slurp(dir / "verify.json"));
  EXPECT_TRUE(j.contains("deficit"));
  EXPECT_TRUE(fs::exists(dir / "gap_samples.dat"));
  r = run({"verify", "--measure", "truncated:2", "--p", "1,2", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  r = run({"verify", "--measure", "perturbed:-0.5,1;-0.3,0.4,1", "--theta", "0.3", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST(Cli, BadThetaIsUsageError) {
  const auto r = run({"verify", "--theta", "1.5", "--out", temp_dir("theta").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("theta out of range (0,1)"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"verify", "--measure", "cauchy", "--out", temp_dir("u1").string()}).code, 2);
  EXPECT_EQ(run({"verify", "--measure", "perturbed:0;1,0.5", "--out", temp_dir("u2").string()}).code, 2);
  EXPECT_EQ(run({"sweep", "--delta-grid", "", "--out", temp_dir("u3").string()}).code, 2);
  EXPECT_EQ(run({"sweep", "--delta-grid", "1e-2,abc", "--out", temp_dir("u4").string()}).code, 2);
  EXPECT_EQ(run({"verify", "--p", "0.5", "--out", temp_dir("u5").string()}).code, 2);
}

TEST(Cli, SweepWritesFilesAndChecksBands) {
  const auto dir = temp_dir("sweep");
  const auto r = run({"sweep", "--metric", "lp:1,lp:2,lp:4,w2", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  for (const char* f : {"sweep_lp_1.csv", "sweep_lp_2.csv", "sweep_lp_4.csv", "sweep_w2.csv", "sweep_w2.dat", "sweep.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(slurp(dir / "sweep_lp_2.csv").substr(0, 12), "delta,value\n");
}

TEST(Cli, SweepOutsideBandFails) {
  const auto dir = temp_dir("sweep_band");
  const auto cfg = dir / "cfg.json";
  fs::create_directories(dir);
  std::ofstream(cfg) << R"({"command":"sweep","metrics":["lp:2"],"exponent_min":0.9,"exponent_max":1.1})";
  EXPECT_EQ(run({"sweep", "--config", cfg.string(), "--out", dir.string()}).code, 1);
}

TEST(Cli, NeedlesRun) {
  const auto dir = temp_dir("needles");
  const auto r = run({"needles", "--needles", "30", "--delta-grid", "1e-2,1e-3,1e-4", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  for (const char* f : {"needles.json", "ensembles.json", "needles.csv", "needles.dat"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
}

TEST(Cli, NeedlesAreByteIdenticalAcrossRuns) {
  const auto dir = temp_dir("det");
  const std::vector<std::string> args{"needles", "--needles", "20", "--delta-grid", "1e-2,1e-3,1e-4",
                                      "--seed",  "5",         "--out", dir.string()};
  const char* files[] = {"needles.json", "ensembles.json", "needles.csv"};
  run(args);
  std::vector<std::string> first;
  for (const char* f : files) first.push_back(slurp(dir / f));
  run(args);
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first[i], slurp(dir / files[i])) << files[i];
}

TEST(Cli, Example23MatchesClosedForms) {
  const auto dir = temp_dir("ex23");
  const auto r = run({"example23", "--D", "2", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_TRUE(fs::exists(dir / "example23.json"));
  EXPECT_EQ(run({"example23", "--D", "-1", "--out", dir.string()}).code, 2);
}

TEST(Cli, ConfigRoundTripAndUnknownKeys) {
  cli::RunConfig c;
  c.command = "sweep";
  c.metrics = {"lp:1", "w2"};
  c.ensemble.deficit_scale = 1e-3;
  c.exponent_min = 0.2;
  c.delta_grid = {1e-2, 1e-3, 1e-4};
  EXPECT_EQ(cli::config_from_json(Json::parse(cli::to_json(c).dump())), c);

  EXPECT_THROW((void)cli::config_from_json(Json::parse(R"({"thetta":0.5})")), cli::ConfigError);
  EXPECT_THROW((void)cli::config_from_json(Json::parse(R"({"ensemble":{"needles":3}})")), cli::ConfigError);
  EXPECT_THROW((void)cli::config_from_json(Json::parse(R"({"theta":"half"})")), cli::ConfigError);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = temp_dir("override");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"command":"verify","measure":"truncated:2","theta":1.5})";
  EXPECT_EQ(run({"verify", "--config", (dir / "cfg.json").string(), "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"verify", "--config", (dir / "cfg.json").string(), "--theta", "0.5", "--out", dir.string()}).code, 0);
  const auto j = Json::parse(slurp(dir / "verify.json"));
  EXPECT_EQ(j.dump().find("truncated") != std::string::npos, true);
}

TEST(Cli, MissingConfigIsUsageError) {
  EXPECT_EQ(run({"verify", "--config", "/nonexistent/cfg.json"}).code, 2);
}
