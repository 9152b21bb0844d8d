#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using ustat::cli::run_cli;

namespace {

const std::string kChain = R"({"type":"finite_markov","states":[0,1],"transition":[[0.7,0.3],[0.3,0.7]]})";
const std::string kCoin = R"({"type":"iid_discrete","alphabet":[0,1],"probs":[0.5,0.5]})";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("ustat_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path config(const std::string& body, const std::string& name = "config.json") {
    const auto p = root_ / name;
    std::ofstream(p) << body;
    return p;
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "ustat");
    std::vector<char*> argv;
    for (auto& s : args) argv.push_back(s.data());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  // Data rows of a CSV, skipping the config comment and the header.
  static std::vector<std::vector<std::string>> rows(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::vector<std::vector<std::string>> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.starts_with("#")) continue;
      if (header) {
        header = false;
        continue;
      }
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      out.push_back(cells);
    }
    return out;
  }

  fs::path root_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, BetaOfIidIsZero) {
  const auto c = config(R"({"process":)" + kCoin + R"(,"t_max":5})");
  ASSERT_EQ(run({"beta", "-c", c.string(), "-o", (root_ / "out").string()}), 0) << err_.str();
  const auto r = rows(root_ / "out" / "beta.csv");
  ASSERT_EQ(r.size(), 5u);
  for (const auto& row : r) {
    EXPECT_EQ(std::stod(row[1]), 0.0);
    EXPECT_EQ(row[2], "exact");
  }
  EXPECT_TRUE(slurp(root_ / "out" / "beta.csv").starts_with("# config: "));
}

TEST_F(Cli, BetaOfChain) {
  const auto c = config(R"({"process":)" + kChain + R"(,"t_max":3})");
  ASSERT_EQ(run({"beta", "-c", c.string(), "-o", root_.string()}), 0) << err_.str();
  const auto r = rows(root_ / "beta.csv");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(std::stod(r[0][1]), 0.2, 1e-15);
  EXPECT_NEAR(std::stod(r[1][1]), 0.08, 1e-15);
  EXPECT_NEAR(std::stod(r[2][1]), 0.032, 1e-15);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({"beta", "-c", config("{not json").string(), "-o", root_.string()}), 2);
  EXPECT_EQ(run({"beta", "-c", config(R"({"process":)" + kChain + R"(,"t_max":3,"extra":1})").string()}), 2);
  EXPECT_NE(err_.str().find("extra"), std::string::npos);
  EXPECT_EQ(run({"beta", "-c", (root_ / "missing.json").string()}), 2);
  EXPECT_EQ(run({"beta"}), 2);
  EXPECT_EQ(run({"nonsense", "-c", "x"}), 2);
}

TEST_F(Cli, DryRunWritesNothing) {
  const auto c = config(R"({"process":)" + kChain + R"(,"kernel":{"name":"product"},"n_grid":[8,16],"replicates":200})");
  const auto out = root_ / "dry";
  ASSERT_EQ(run({"verify-clt", "-c", c.string(), "-o", out.string(), "--dry-run"}), 0) << err_.str();
  EXPECT_FALSE(fs::exists(out));
  EXPECT_NE(out_.str().find("command: verify-clt"), std::string::npos);
  EXPECT_NE(out_.str().find("plan: n=8"), std::string::npos);
}

TEST_F(Cli, VerifyCltNegativeControlExitsThree) {
  // X_i X_j - mu^2 with mu = E X is degenerate: the limit is not normal.
  const auto c = config(R"({"process":)" + kCoin +
                        R"(,"kernel":{"name":"degenerate_product","params":{"mu":0.5}},"n_grid":[32,64],)"
                        R"("replicates":400,"seed":5,"centering":"estimated",)"
                        R"("thresholds":{"ks_final_max":0.03,"m4_abs_dev_max":0.2}})");
  EXPECT_EQ(run({"verify-clt", "-c", c.string(), "-o", root_.string()}), 3) << err_.str();
  for (const char* f : {"report.json", "report.csv", "plot_ks.csv", "plot_m4.csv"}) {
    EXPECT_TRUE(fs::exists(root_ / f)) << f;
  }
  EXPECT_NE(slurp(root_ / "report.json").find("\"seconds\": null"), std::string::npos);
}

TEST_F(Cli, OracleBudget) {
  const auto ok = config(R"({"process":)" + kChain + R"(,"kernel":{"name":"product"},"n_grid":[4,6],"budget":1000})");
  ASSERT_EQ(run({"oracle", "-c", ok.string(), "-o", root_.string()}), 0) << err_.str();
  EXPECT_EQ(rows(root_ / "oracle.csv").size(), 2u);
  const auto over =
      config(R"({"process":)" + kChain + R"(,"kernel":{"name":"product"},"n_grid":[4,20],"budget":1000})", "over.json");
  EXPECT_EQ(run({"oracle", "-c", over.string(), "-o", (root_ / "o2").string()}), 4);
}

TEST_F(Cli, ConditionsRejectsKappaNotAboveB0) {
  const auto c = config(
      R"({"r":2,"kappa":0.5,"b0":0.5,"n_grid":[1000,10000],"b_grid":[0.5],)"
      R"("variance":{"constant":1},"mixing":{"rate":"linear","scale":1}})");
  EXPECT_EQ(run({"conditions", "-c", c.string(), "-o", root_.string()}), 2);
  EXPECT_EQ(run({"conditions", "-c", c.string(), "-o", root_.string(), "--dry-run"}), 2);
}

TEST_F(Cli, SeedOverrideIsEchoedAndOutputsRepeat) {
  const auto c = config(R"({"process":)" + kChain + R"(,"n":10,"paths":3,"seed":1})");
  ASSERT_EQ(run({"simulate", "-c", c.string(), "-o", (root_ / "a").string(), "--seed", "42"}), 0) << err_.str();
  const auto a = slurp(root_ / "a" / "paths.csv");
  EXPECT_NE(a.find("\"seed\":42"), std::string::npos);
  ASSERT_EQ(run({"simulate", "-c", c.string(), "-o", (root_ / "b").string(), "--seed", "42", "-j", "3"}), 0);
  EXPECT_EQ(a, slurp(root_ / "b" / "paths.csv"));
  ASSERT_EQ(run({"simulate", "-c", c.string(), "-o", (root_ / "c").string()}), 0);
  EXPECT_NE(a, slurp(root_ / "c" / "paths.csv"));
  EXPECT_EQ(rows(root_ / "c" / "paths.csv").size(), 30u);
}

TEST_F(Cli, GraphAuditPasses) {
  const auto c = config(R"({"n":[4,6],"r":[1,2],"m":[0,1]})");
  EXPECT_EQ(run({"graph-audit", "-c", c.string(), "-o", root_.string()}), 0) << err_.str();
  EXPECT_TRUE(fs::exists(root_ / "graph_audit.csv"));
}
