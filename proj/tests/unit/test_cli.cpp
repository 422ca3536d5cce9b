#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include "advrand/config.hpp"
#include "advrand/io.hpp"
#include "advrand/report.hpp"

using namespace advrand;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded; returns exit code and stdout.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string(ADVRAND_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch() {
  static const fs::path p = [] {
    const fs::path d = fs::temp_directory_path() / "advrand-cli-test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

ScenarioReport scored(const std::string& attack, std::vector<bool> correct) {
  ScenarioReport r;
  r.model_id = "adv";
  r.attack_id = attack;
  r.scenario_id = "vanilla/challenge";
  r.n_images = correct.size();
  r.defense_accuracy_runs = {0.0};
  r.defense_correct = {std::move(correct)};
  return r;
}

}  // namespace

TEST(Cli, ConfigPrintsTheResolvedConfiguration) {
  const CliRun r = cli("config");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, parse_config("").resolved());
  EXPECT_NE(cli("config --seed 9 -s evaluate.n_images=7").out.find("n_images = 7"), std::string::npos);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, UsageAndConfigErrorsExitWithOne) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("config -s evaluate.nope=1").code, 1);
  EXPECT_EQ(cli("attack").code, 1);  // --attack is required
  write_file(scratch() / "bad.ini", "[data]\ntrain_count = many\n");
  EXPECT_EQ(cli("config -c " + (scratch() / "bad.ini").string()).code, 1);
}

TEST(Cli, FileErrorsExitWithTwo) {
  EXPECT_EQ(cli("config -c /nonexistent/x.ini").code, 2);
  EXPECT_EQ(cli("score -r /nonexistent/r.json").code, 2);
  write_file(scratch() / "broken.json", "{\"reports\": [");
  EXPECT_EQ(cli("score -r " + (scratch() / "broken.json").string()).code, 2);
  EXPECT_EQ(cli("evaluate -q -o " + (scratch() / "no-workspace").string()).code, 2);
}

TEST(Cli, DivergedTrainingExitsWithThree) {
  const std::string ws = (scratch() / "diverge").string();
  const std::string opts = " -q -o " + ws + " -s data.train_count=20 -s data.test_count=10 -s model.epochs=3" +
                           " -s model.lr=1e308 -s model.adversarial=false";  // overflows in epoch 3
  EXPECT_EQ(cli("gen-data" + opts).code, 0);
  EXPECT_EQ(cli("train" + opts).code, 3);
}

TEST(Cli, ScoreCountsAttackedRows) {
  const std::string echo = parse_config("").resolved();
  const fs::path f = scratch() / "rows.json";
  write_file(f, reports_json({scored("cw", {true, true, false}), scored("fgsm2", {true}),
                              scored("clean", {false, false})},
                             echo));
  const CliRun r = cli("score -r " + f.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0.750000\n");
  const fs::path all = scratch() / "all.json";
  write_file(all, reports_json({scored("cw", {true, true}), scored("deepfool", {true})}, echo));
  EXPECT_EQ(cli("score --all -r " + all.string()).out, "1.000000\n");
  EXPECT_EQ(cli("score --model plain -r " + all.string()).code, 1);  // no matching rows
}

TEST(Cli, ReportFilesCarryTheirConfig) {
  const std::string echo = parse_config("master_seed = 77\n").resolved();
  const fs::path f = scratch() / "table.csv";
  write_file(f, reports_csv({}, echo));
  const CliRun r = cli("config -c " + f.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, echo);
}
