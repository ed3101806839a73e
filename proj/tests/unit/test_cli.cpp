#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "contagion/io.hpp"

using namespace contagion;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "contagion_cli_test";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(CONTAGION_CLI) + " " + args + " > " +
                          (kDir / "stdout.txt").string() + " 2> " + (kDir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string path(const std::string& name) { return (kDir / name).string(); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::create_directories(kDir);
    ASSERT_EQ(run("simulate --model delayed --delta 0.5 --M 200000 --seed 3 --out " + path("delayed.csv")), 0);
  }
};

}  // namespace

TEST_F(Cli, SimulateWritesCountsAndSidecar) {
  EXPECT_TRUE(fs::exists(path("delayed.csv.json")));
  const auto emp = read_counts(path("delayed.csv"));
  EXPECT_EQ(emp.M(), 200000u);
  EXPECT_EQ(read_json(path("delayed.csv.json"))["seed"], 3);
}

TEST_F(Cli, ExactSimulationWritesProbabilities) {
  ASSERT_EQ(run("simulate --model instant --delta 0.25 --exact --T 3 --out " + path("instant.json")), 0);
  const auto data = load_data(path("instant.json"));
  EXPECT_EQ(data.T, 3);
  EXPECT_EQ(data.p.size(), 64u);
}

TEST_F(Cli, FindTestThenCertify) {
  ASSERT_EQ(run("find-test --in " + path("delayed.csv") + " --d-max 1 --sweep --cert " + path("cert.json") +
                " --out " + path("report.json")),
            0);
  const json report = read_json(path("report.json"));
  EXPECT_EQ(report["gamma_by_degree"].size(), 2u);
  EXPECT_TRUE(report["validation"]["valid"].get<bool>());
  EXPECT_EQ(report["verdict"]["decision"], "reject");
  EXPECT_EQ(run("certify --cert " + path("cert.json") + " --in " + path("delayed.csv")), 0);

  json cert = read_json(path("cert.json"));
  cert["gamma"] = cert["gamma"].get<double>() + 0.1;
  write_json(path("tampered.json"), cert);
  EXPECT_EQ(run("certify --cert " + path("tampered.json") + " --in " + path("delayed.csv")), 1);
}

TEST_F(Cli, CheckEqualities) {
  ASSERT_EQ(run("check-equalities --in " + path("delayed.csv") + " --observable c2 --out " + path("c2.json")), 0);
  const json r = read_json(path("c2.json"));
  EXPECT_EQ(r["verdict"]["decision"], "reject");
  ASSERT_EQ(run("check-equalities --T 4 --out " + path("space.json")), 0);
  EXPECT_EQ(read_json(path("space.json"))["null_space_dimension"], 60);
}

TEST_F(Cli, JpeAndThreshold) {
  ASSERT_EQ(run("jpe --in " + path("delayed.csv") + " --variant 1 --out " + path("jpe.json")), 0);
  EXPECT_EQ(read_json(path("jpe.json"))["decision"], "reject");
  ASSERT_EQ(run("threshold --M 1000 10000 --runs 20 --T 2"), 0);
  const std::string csv = read_text(path("stdout.txt"));
  EXPECT_EQ(csv.rfind("M,inverse_sqrt_M,uniform", 0), 0u);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("simulate --model nonsense --out " + path("x.csv")), 2);
  EXPECT_EQ(run("find-test --in " + path("missing.csv")), 2);
  EXPECT_EQ(run("jpe --in " + path("delayed.csv") + " --variant 7"), 2);
  EXPECT_EQ(run("find-test --in " + path("delayed.csv") + " --class delta --delta-lo 0.5 --delta-hi 0.1"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST_F(Cli, ResourceLimitExitsThree) {
  EXPECT_EQ(run("find-test --in " + path("delayed.csv") + " --d-max 8", "CONTAGION_MEMORY_BUDGET=1M"), 3);
}

TEST_F(Cli, DegenerateGraphExitsTwo) {
  EXPECT_EQ(run("simulate --model copying --nodes 1 --M 10 --out " + path("c.csv")), 2);
}
