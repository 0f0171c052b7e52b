#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace wavegauge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "wavegauge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wavegauge_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_config(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  fs::path dir_;
};

const char* kPacketConfig =
    "[evolve]\n"
    "initial = packet\n"
    "packet_sigma = 0.5\n"
    "packet_amplitude = 1e-4\n"
    "output_every = 2\n"
    "max_order = 1\n"
    "[grid]\n"
    "n = 17\n"
    "extent = 3.5\n"
    "t_final = 0.5\n";

}  // namespace

TEST_F(CliTest, CheckFramePasses) {
  const auto r = run({"check-frame", "--samples", "1000", "--seed", "7", "--out", path("out")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("PASS check-frame/frame"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "check-frame.json"));
  EXPECT_EQ(j["exit_code"], 0);
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["config"]["frame.samples"], "1000");
  EXPECT_TRUE(j["suites"][0]["pass"].get<bool>());
}

TEST_F(CliTest, RiccatiReportsBlowupTime) {
  const auto r = run({"asymptotic", "--preset", "riccati", "--w0", "1.0", "--out", path("out")});
  EXPECT_EQ(r.code, 0) << r.err;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex(R"(s\* = ([0-9.eE+-]+))"))) << r.out;
  EXPECT_NEAR(std::stod(m[1]), 1.0, 0.02);
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "asymptotic.json"));
  EXPECT_NEAR(j["results"]["s_star"].get<double>(), 1.0, 0.02);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "asymptotic.csv"));
}

TEST_F(CliTest, RiccatiScalesWithAmplitude) {
  const auto r = run({"asymptotic", "--preset", "riccati", "--w0", "2.0", "--out", path("out")});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "asymptotic.json"));
  EXPECT_NEAR(j["results"]["s_star"].get<double>(), 0.5, 0.01);
}

TEST_F(CliTest, MissingConfigIsConfigError) {
  const auto r = run({"evolve", "--config", path("missing.cfg"), "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
}

TEST_F(CliTest, UnknownSubcommandOrFlagIsConfigError) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"check-frame", "--bogus", "1"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST_F(CliTest, UnknownKeysAreRejected) {
  const auto a = write_config("a.cfg", "[evolve]\ninitial = packet\ntypo = 1\n");
  auto r = run({"evolve", "--config", a, "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("evolve.typo"), std::string::npos);
  const auto b = write_config("b.cfg", "[nosuch]\nx = 1\n");
  EXPECT_EQ(run({"check-frame", "--config", b, "--out", path("out")}).code, 2);
}

TEST_F(CliTest, OtherSubcommandSectionsAreIgnored) {
  const auto c = write_config("c.cfg", std::string(kPacketConfig) + "[frame]\nsamples = 10\n");
  const auto r = run({"check-frame", "--config", c, "--out", path("out")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, SharedChecksSection) {
  const auto c = write_config("c.cfg", "[checks]\nenergy_drift = 1\nnorm_residual = 1e-8\n[frame]\nsamples = 5\n");
  EXPECT_EQ(run({"check-frame", "--config", c, "--out", path("out")}).code, 0);
  const auto b = write_config("b.cfg", "[checks]\nenergy_drfit = 1\n");
  EXPECT_EQ(run({"check-frame", "--config", b, "--out", path("out")}).code, 2);
}

TEST_F(CliTest, CrossFieldValidationNamesTheInvariant) {
  const auto c = write_config("c.cfg", std::string(kPacketConfig) + "");
  auto r = run({"evolve", "--config", c, "--t-final", "5", "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("grid.extent"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "diagnostics.csv"));

  const auto d = write_config("d.cfg", "[data]\nM = 0.3\nr_inner = 0.5\n[grid]\nn = 17\nt_final = 0.5\n");
  r = run({"build-data", "--config", d, "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("r_inner"), std::string::npos) << r.err;

  const auto e = write_config("e.cfg", "[perturbation]\nbump1 = 1 1 1e-3 0.8 0 0 0.5\n[grid]\nn = 17\n");
  r = run({"build-data", "--config", e, "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("perturbation"), std::string::npos) << r.err;
}

TEST_F(CliTest, BuildDataWritesCheckpointAndPasses) {
  const auto c = write_config("c.cfg",
                              "[data]\nM = 0.01\nr_outer = 7\n[perturbation]\nbump1 = 1 2 1e-4 0 0 0 0.5\n"
                              "bump2 = 3 3 1e-4 0 0 0 0.5 dt\n[grid]\nn = 17\nextent = 4\n");
  const auto r = run({"build-data", "--config", c, "--out", path("out")});
  EXPECT_EQ(r.code, 0) << r.err << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "initial.chk"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "data.csv"));
  const MetricState s = driver::read_checkpoint(path("out/initial.chk"));
  EXPECT_EQ(s.grid.n, 17);
}

TEST_F(CliTest, EvolveIsByteIdenticalAcrossRunsAndThreads) {
  const auto c = write_config("c.cfg", kPacketConfig);
  const auto a = run({"evolve", "--config", c, "--out", path("a"), "--threads", "1"});
  const auto b = run({"evolve", "--config", c, "--out", path("b"), "--threads", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"diagnostics.csv", "final.chk"}) {
    const std::string x = slurp(dir_ / "a" / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(dir_ / "b" / f)) << f;
  }
  auto ja = nlohmann::ordered_json::parse(slurp(dir_ / "a" / "evolve.json"));
  auto jb = nlohmann::ordered_json::parse(slurp(dir_ / "b" / "evolve.json"));
  for (auto* j : {&ja, &jb}) {
    j->erase("timestamp");
    (*j)["config"].erase("run.out");
  }
  EXPECT_EQ(ja.dump(), jb.dump());
  set_thread_count(0);
}

TEST_F(CliTest, EvolveRestartsFromCheckpoint) {
  const auto c = write_config("c.cfg", kPacketConfig);
  ASSERT_EQ(run({"evolve", "--config", c, "--out", path("a")}).code, 0);
  const auto r2 = write_config("r.cfg", "[evolve]\ninitial = checkpoint\ncheckpoint = " + path("a/final.chk") +
                                            "\n[grid]\nt_final = 0.75\n");
  const auto r = run({"evolve", "--config", r2, "--out", path("b")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(driver::read_checkpoint(path("b/final.chk")).t, 0.75, 1e-12);
}

TEST_F(CliTest, RuntimeFailureWritesLastValidCheckpoint) {
  GridSpec g;
  g.n = 17;
  g.extent = 3.5;
  g.t_final = 0.5;
  MetricState s = data::flat_packet(g, 1, 1, 1e-4, 0.5);
  s.dth[sym_index(1, 1)][g.index(8, 8, 8)] = 100.0;
  driver::write_checkpoint(path("bad.chk"), s);
  const auto c = write_config("c.cfg", "[evolve]\ninitial = checkpoint\ncheckpoint = " + path("bad.chk") + "\n");
  const auto r = run({"evolve", "--config", c, "--out", path("out")});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "last_valid.chk"));
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "evolve.json"));
  EXPECT_EQ(j["exit_code"], 3);
  EXPECT_TRUE(j.contains("error"));
}

TEST_F(CliTest, FailedSuiteExitsOne) {
  const auto c = write_config("c.cfg", std::string(kPacketConfig) + "[checks]\ngauge_linf = 0\n");
  const auto r = run({"evolve", "--config", c, "--out", path("out")});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.out.find("FAIL evolve/gauge-monitor"), std::string::npos);
}

TEST_F(CliTest, GeodesicLaunchTable) {
  const auto c = write_config("g.cfg",
                              "[geodesic]\nM = 0.1\ntau_max = 20\nlaunch1 = 0 10 0 0 0 1 0 0\n"
                              "launch2 = 0 0 8 0 1.2 0 0 0.3\n");
  const auto r = run({"geodesic", "--config", c, "--out", path("out")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "geodesic_launch1.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "geodesic_launch2.csv"));
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "geodesic.json"));
  EXPECT_NEAR(j["results"]["trajectories"][0]["A2"].get<double>(), 0.0, 1e-12);
  EXPECT_GT(j["results"]["trajectories"][1]["A2"].get<double>(), 0.0);
}

TEST_F(CliTest, SpacelikeLaunchIsConfigError) {
  const auto c = write_config("g.cfg", "[geodesic]\nlaunch1 = 0 10 0 0 0.5 1 0 0\n");
  const auto r = run({"geodesic", "--config", c, "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("spacelike"), std::string::npos) << r.err;
}

TEST_F(CliTest, CustomQuadraticSystem) {
  const auto c = write_config("q.cfg", "[asymptotic]\npreset = custom\nw0 = 1\ns_max = 3\nterm1 = 0 0 0 0 0 2\n");
  const auto r = run({"asymptotic", "--config", c, "--out", path("out")});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "asymptotic.json"));
  EXPECT_TRUE(j["results"]["blew_up"].get<bool>());
  const auto bad = write_config("b.cfg", "[asymptotic]\npreset = custom\nterm1 = 0 0 0 9 0 2\n");
  EXPECT_EQ(run({"asymptotic", "--config", bad, "--out", path("out")}).code, 2);
}

TEST_F(CliTest, ReportAggregatesSummaries) {
  EXPECT_EQ(run({"report", "--out", path("out")}).code, 2);
  ASSERT_EQ(run({"check-frame", "--samples", "50", "--out", path("out")}).code, 0);
  ASSERT_EQ(run({"asymptotic", "--preset", "riccati", "--out", path("out")}).code, 0);
  auto r = run({"report", "--out", path("out")});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS report/check-frame/frame"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "report.json"));
  const auto c = write_config("c.cfg", std::string(kPacketConfig) + "[checks]\ngauge_linf = 0\n");
  ASSERT_EQ(run({"evolve", "--config", c, "--out", path("out")}).code, 1);
  r = run({"report", "--out", path("out")});
  EXPECT_EQ(r.code, 1);
}
