#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "ruckep/bundle.hpp"
#include "ruckep/export.hpp"

using namespace ruckep;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ruckep_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args, const std::string& env = "") {
  const auto err = fs::temp_directory_path() / "ruckep_cli_stderr.txt";
  const std::string cmd = env + " " + RUCKEP_CLI + " " + args + " 2>" + err.string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read(err);
  return r;
}

const std::string kData = RUCKEP_DATA_DIR;

}  // namespace

TEST(Cli, DecideCaseStudyRoundTrips) {
  const auto r = run("decide --x 30 --y -20 --d-touch 20 --bundle builtin:demo");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const auto local = evaluate(DecisionQuery::make(30, -20, 20), demo_bundle().models());
  EXPECT_EQ(decision_result_from_json(j), local);
  EXPECT_NE(r.err.find("verdict: lineout (delta +0.25"), std::string::npos) << r.err;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("decide --x 4 --y 0 --d-touch 10").code, 2);
  EXPECT_EQ(run("decide --x 30").code, 1);
  EXPECT_EQ(run("nonsense").code, 1);
  EXPECT_EQ(run("decide --x 30 --y 0 --d-touch 10 --cards 9").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, IngestDeterministic) {
  const auto a = scratch("ingest_a"), b = scratch("ingest_b");
  const std::string in = " --input " + kData + "/sample_phases.csv --zones " + kData + "/zones.cfg --seed 7";
  ASSERT_EQ(run("ingest" + in + " --out " + a.string()).code, 0);
  ASSERT_EQ(run("ingest" + in + " --out " + b.string()).code, 0);
  EXPECT_EQ(read(a / "possessions.csv"), read(b / "possessions.csv"));
  EXPECT_EQ(read(a / "ingest_report.json"), read(b / "ingest_report.json"));
  const auto rep = nlohmann::json::parse(read(a / "ingest_report.json"));
  EXPECT_EQ(rep["raw_rows"], 11);
  EXPECT_EQ(rep["phase1_lineouts"], 7);
  EXPECT_EQ(rep["groups"], 6);
  EXPECT_EQ(rep["sampled"], 6);
}

TEST(Cli, IngestNeedsSeed) {
  const auto d = scratch("ingest_seed");
  const auto r = run("ingest --input " + kData + "/sample_phases.csv --out " + d.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--seed"), std::string::npos);
  EXPECT_EQ(run("ingest --no-sample --input " + kData + "/sample_phases.csv --out " + d.string()).code, 0);
}

TEST(Cli, IngestEmptyInput) {
  const auto d = scratch("ingest_empty");
  std::ofstream(d / "empty.csv").close();
  ASSERT_EQ(run("ingest --seed 1 --input " + (d / "empty.csv").string() + " --out " + d.string()).code, 0);
  const auto rep = nlohmann::json::parse(read(d / "ingest_report.json"));
  EXPECT_EQ(rep["raw_rows"], 0);
  EXPECT_EQ(rep["sampled"], 0);
}

TEST(Cli, FitBuiltinsAndDecideWithBundle) {
  const auto d = scratch("fit");
  const auto r = run("fit --lineout builtin:premiership-2018-19 --kick builtin:demo --out " + d.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = read(d / "fit_report.txt");
  EXPECT_NE(report.find("Pr(>|t|)"), std::string::npos);
  EXPECT_NE(report.find("< 2e-16"), std::string::npos);
  const auto lineout = nlohmann::json::parse(read(d / "lineout.json"));
  EXPECT_EQ(lineout["coefficients"][0], 3.2545);

  const auto a = run("decide --x 30 --y -20 --d-touch 20 --bundle " + d.string());
  const auto b = run("decide --x 30 --y -20 --d-touch 20");
  ASSERT_EQ(a.code, 0) << a.err;
  auto ja = nlohmann::json::parse(a.out), jb = nlohmann::json::parse(b.out);
  EXPECT_EQ(ja["delta"], jb["delta"]);
  EXPECT_NE(ja["bundle_id"], jb["bundle_id"]);

  const auto env = run("decide --x 30 --y -20 --d-touch 20", "RUCK_EP_BUNDLE=" + d.string());
  EXPECT_EQ(nlohmann::json::parse(env.out)["bundle_id"], ja["bundle_id"]);
}

TEST(Cli, FitMissingKickGridNamesFlag) {
  const auto d = scratch("fit_missing");
  const auto r = run("fit --lineout builtin:premiership-2018-19 --out " + d.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--kick-grid"), std::string::npos);
}

TEST(Cli, SurfaceFilesAndDeterminism) {
  const auto a = scratch("surface_a"), b = scratch("surface_b");
  const std::string args = "surface --d-touch 0 5 10 15 20 25 --step 2.5 --format both --out ";
  ASSERT_EQ(run(args + a.string()).code, 0);
  ASSERT_EQ(run(args + b.string()).code, 0);
  std::set<std::string> frontiers;
  for (const char* d : {"0", "5", "10", "15", "20", "25"}) {
    const auto name = std::string("grid_dtouch_") + d;
    EXPECT_EQ(read(a / (name + ".json")), read(b / (name + ".json")));
    EXPECT_EQ(read(a / (name + ".csv")), read(b / (name + ".csv")));
    frontiers.insert(nlohmann::json::parse(read(a / (name + ".json")))["frontier"].dump());
  }
  EXPECT_EQ(frontiers.size(), 6u);
}

TEST(Cli, SurfaceCoarseStep) {
  const auto d = scratch("surface_coarse");
  ASSERT_EQ(run("surface --d-touch 10 --step 70 --out " + d.string()).code, 0);
  const auto j = nlohmann::json::parse(read(d / "grid_dtouch_10.json"));
  EXPECT_EQ(j["x_axis"].size(), 1u);
}

TEST(Cli, RegretMatchDecisions) {
  const auto r = run("regret --decisions " + kData + "/match_decisions.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("team,lineout_ep,kick_ep,decision,optimal_decision,regret"), std::string::npos);
  EXPECT_NE(r.out.find("# total_regret="), std::string::npos);
  // exported ledger feeds back in
  const auto d = scratch("regret");
  std::ofstream(d / "ledger.csv") << r.out;
  const auto again = run("regret --decisions " + (d / "ledger.csv").string());
  EXPECT_EQ(again.out, r.out);
}
