#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "gfbm/cli.hpp"

namespace fs = std::filesystem;
using gfbm::cli::dispatch;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "gfbm");
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("gfbm_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST(Cli, ClassifyExample) {
  const auto r = run({"classify", "--alpha", "0.6", "--gamma", "0.5"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("regime"), "differentiable");
  EXPECT_NEAR(j.at("H").get<double>(), 0.85, 1e-15);
}

TEST(Cli, ClassifyInvalid) {
  const auto r = run({"classify", "--alpha", "0.7", "--gamma", "0.2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(nlohmann::json::parse(r.out).at("regime"), "invalid");
}

TEST(Cli, KappaBrownianMotionFallsBackToQuadrature) {
  const auto r = run({"kappa", "--alpha", "0", "--gamma", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("kappa").get<double>(), 1.0, 1e-10);
  EXPECT_EQ(j.at("route"), "quad");
  const auto closed = run({"kappa", "--alpha", "0", "--gamma", "0", "--route", "closed"});
  EXPECT_EQ(closed.code, 1);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"simulate", "--alpha", "0.7", "--gamma", "0.2"}).code, 1);
  EXPECT_EQ(run({"simulate", "--alpha", "0.2", "--gamma", "0.2", "--bogus", "1"}).code, 64);
  EXPECT_EQ(run({"frobnicate"}).code, 64);
  EXPECT_EQ(run({}).code, 64);
  EXPECT_EQ(run({"verify", "--alpha", "0", "--gamma", "0", "--checks", "nope"}).code, 64);
  EXPECT_EQ(run({"simulate", "--alpha", "0.4", "--gamma", "0.6", "--method", "derivative"}).code, 1);
  EXPECT_EQ(run({"sigma", "--alpha", "-0.1", "--gamma", "0.3", "--b", "1"}).code, 1);
  EXPECT_EQ(run({"--version"}).out, std::string(gfbm::kToolVersion) + "\n");
}

TEST(Cli, VerifyFailingCheckExitsThree) {
  const auto pass = run({"verify", "--alpha", "0.25", "--gamma", "0.5", "--checks", "c1,sigma"});
  EXPECT_EQ(pass.code, 0) << pass.out;
  const auto reports = nlohmann::json::parse(pass.out);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].at("check_name"), "c1_scaling_check");
  EXPECT_EQ(reports[1].at("check_name"), "sigma_composition");
  const auto fail = run({"verify", "--alpha", "0.25", "--gamma", "0.5", "--checks", "flil", "--paths", "200"});
  EXPECT_EQ(fail.code, 3) << fail.out;
  EXPECT_FALSE(nlohmann::json::parse(fail.out)[0].at("passed").get<bool>());
}

TEST(Cli, VerifyAlphaChecks) {
  EXPECT_EQ(run({"verify", "--alpha", "-0.1", "--gamma", "0.3", "--checks", "sigma"}).code, 1);
  const auto r = run({"verify", "--alpha", "-0.1", "--gamma", "0.3", "--checks", "c1,sigma,llil"});
  EXPECT_EQ(r.code, 1);
  const auto implicit = run({"verify", "--alpha", "-0.1", "--gamma", "0.3", "--paths", "100"});
  for (const auto& rep : nlohmann::json::parse(implicit.out)) {
    EXPECT_NE(rep.at("check_name"), "sigma_composition");
    EXPECT_NE(rep.at("check_name"), "llil_quantile_stability");
  }
}

TEST_F(CliFiles, SimulateIsBitReproducible) {
  const std::vector<std::string> base{"simulate", "--alpha", "0.25", "--gamma", "0.5", "--paths", "50",
                                      "--grid-n", "8", "--seed", "42", "--out"};
  auto a = base, b = base;
  a.push_back(path("a.csv"));
  b.push_back(path("b.csv"));
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  const std::string ca = slurp(path("a.csv"));
  EXPECT_EQ(ca, slurp(path("b.csv")));
  const auto table = gfbm::read_csv_file(path("a.csv"));
  EXPECT_EQ(table.rows.rows(), 50);
  EXPECT_EQ(table.header.size(), 9u);

  const auto man = nlohmann::json::parse(slurp(path("a.csv.manifest.json")));
  EXPECT_EQ(man.at("command"), "simulate");
  EXPECT_EQ(man.at("seed"), 42u);
  EXPECT_EQ(man.at("tool_version"), gfbm::kToolVersion);
  EXPECT_EQ(man.at("outputs")[0], path("a.csv"));
  EXPECT_EQ(man.at("method"), "exact");
  EXPECT_TRUE(man.contains("timestamp"));

  fs::rename(path("a.csv"), path("a.orig"));
  ASSERT_EQ(run({"replay", path("a.csv.manifest.json")}).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), ca);
}

TEST_F(CliFiles, CsvRoundTripsDoubles) {
  ASSERT_EQ(run({"cov", "--alpha", "-0.1", "--gamma", "0.3", "--uniform", "4,1", "--out", path("c.csv")}).code, 0);
  const auto t = gfbm::read_csv_file(path("c.csv"));
  const auto ctx = gfbm::make_context(gfbm::ModelParams::validate(-0.1, 0.3));
  EXPECT_EQ(t.rows(2, 4), gfbm::psi(ctx, 0.5, 1.0));
  EXPECT_TRUE(fs::exists(path("c.csv.manifest.json")));

  std::ofstream(path("times.txt")) << "0\n0.3\n0.7\n";
  const auto r = run({"phi", "--alpha", "-0.1", "--gamma", "0.3", "--grid", path("times.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  std::getline(is, row);
  EXPECT_EQ(gfbm::parse_csv_line(row)[2], gfbm::phi(ctx, 0.3, 0.7));
}

TEST_F(CliFiles, EstimateFromCsv) {
  ASSERT_EQ(run({"simulate", "--alpha", "0.625", "--gamma", "0.75", "--paths", "2000", "--grid-n", "16", "--seed",
                 "3", "--out", path("p.csv")})
                .code,
            0);
  const auto r = run({"estimate", "--in", path("p.csv"), "--out", path("e.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out).at("H_hat").get<double>(), 0.75, 0.05);
  const auto man = nlohmann::json::parse(slurp(path("e.json.manifest.json")));
  EXPECT_NEAR(man.at("params").at("alpha").get<double>(), 0.625, 0.0);
  EXPECT_EQ(run({"estimate", "--in", path("missing.csv")}).code, 64);
}

TEST_F(CliFiles, VerifyReportReplays) {
  const std::vector<std::string> args{"verify", "--alpha", "0.25",   "--gamma", "0.5", "--checks",
                                      "hurst",  "--seed",  "7",      "--out",   path("v.json")};
  ASSERT_EQ(run(args).code, 0);
  auto strip = [](nlohmann::json j) {
    for (auto& r : j) r.erase("runtime");
    return j.dump();
  };
  const std::string first = strip(nlohmann::json::parse(slurp(path("v.json"))));
  ASSERT_EQ(run({"replay", path("v.json.manifest.json")}).code, 0);
  EXPECT_EQ(strip(nlohmann::json::parse(slurp(path("v.json")))), first);
}

TEST(CliBinary, ExitCodesThroughProcess) {
  const std::string tool = GFBM_TOOL_PATH;
  auto code = [&](const std::string& args) {
    const int status = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(code("classify --alpha 0.6 --gamma 0.5"), 0);
  EXPECT_EQ(code("simulate --alpha 0.7 --gamma 0.2"), 1);
  EXPECT_EQ(code("kappa --alpha 0 --gamma 0 --unknown"), 64);
}
