#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include "advrand/config.hpp"
#include "advrand/errors.hpp"
#include "advrand/io.hpp"
#include "advrand/pipeline.hpp"
#include "advrand/report.hpp"

using namespace advrand;
namespace fs = std::filesystem;

namespace {

// Seconds-long configuration; the numbers it produces mean nothing.
const char* kTiny = R"(
master_seed = 21
[data]
train_count = 1000
test_count = 100
[model]
epochs = 3
adversarial = false
[evaluate]
n_images = 6
ensemble_images = 2
defense_runs = 2
[diagnose]
n_images = 2
[sweep]
counts = 1, 2
n_images = 4
[challenge]
n_iterations = 2
[attack.fgsm5]
kind = fgsm
epsilon = 5/255
[attack.deepfool]
kind = deepfool
max_iter = 10
[attack.cw]
kind = cw
c = 3
max_iter = 10
lr = 0.03
)";

ExperimentConfig tiny(const fs::path& out, std::size_t workers) {
  ExperimentConfig c = parse_config(kTiny);
  c.output = out.string();
  c.workers = workers;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("advrand-pipeline-" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_file(e.path());
  return out;
}

void run_all(Pipeline& p) {
  p.gen_data();
  p.train();
  p.evaluate();
  p.sweep();
  p.diagnose();
  p.report();
}

const fs::path& first_run() {
  static const fs::path dir = [] {
    const fs::path d = scratch("a");
    Pipeline p(tiny(d, 1));
    run_all(p);
    return d;
  }();
  return dir;
}

}  // namespace

TEST(Pipeline, WritesEveryStage) {
  const Workspace ws(first_run());
  EXPECT_TRUE(fs::exists(ws.train_data()));
  EXPECT_TRUE(fs::exists(ws.test_data()));
  EXPECT_TRUE(fs::exists(ws.model("plain")));
  EXPECT_FALSE(fs::exists(ws.model("adv")));
  for (const char* stage : {"evaluate", "diagnose", "sweep"}) EXPECT_TRUE(fs::exists(ws.results(stage))) << stage;
  const auto files = read_dir(ws.report_dir());
  for (const char* f : {"all.csv", "table_vanilla.csv", "table_ensemble.json", "table_pad1.csv", "table_resize1.csv",
                        "table_vanilla_hueplusplus.csv", "table_vanilla_allplusplus.csv", "table_vanilla_downscale.csv", "table_vanilla_challenge.csv",
                        "sweep_clean.dat", "sweep_ensemble.dat"})
    EXPECT_TRUE(files.count(f)) << f;
}

TEST(Pipeline, EveryReportFileEmbedsTheConfig) {
  const std::string resolved = tiny("", 1).resolved();
  for (const auto& [name, text] : read_dir(Workspace(first_run()).report_dir()))
    EXPECT_EQ(embedded_config(text), resolved) << name;
  for (const char* stage : {"evaluate", "diagnose", "sweep"})
    EXPECT_EQ(embedded_config(read_file(Workspace(first_run()).results(stage))), resolved) << stage;
}

TEST(Pipeline, RowsCoverModelsScenariosAndAttacks) {
  const auto rows = parse_reports_json(read_file(Workspace(first_run()).results("evaluate")));
  std::map<std::string, int> per_scenario;
  for (const auto& r : rows) {
    ++per_scenario[r.scenario_id];
    EXPECT_EQ(r.model_id, "plain");
    EXPECT_GE(r.defense_accuracy_mean, 0.0);
    EXPECT_LE(r.defense_accuracy_mean, 1.0);
  }
  EXPECT_EQ(per_scenario["vanilla"], 4);  // clean + 3 attacks
  EXPECT_EQ(per_scenario["single"], 3);
  EXPECT_EQ(per_scenario["ensemble"], 3);
  EXPECT_EQ(per_scenario["vanilla/hue"], 2);
  EXPECT_EQ(per_scenario["vanilla/challenge"], 4);
  EXPECT_EQ(per_scenario["vanilla/hue++"], 2);
  EXPECT_EQ(per_scenario["vanilla/all++"], 2);
  for (const auto& r : rows) EXPECT_TRUE(r.scenario_id != "ensemble" || r.n_images == 2u) << r.attack_id;
  const double s = score_reports(rows, {"plain", "vanilla/challenge"});
  EXPECT_GE(s, 0.0);
  EXPECT_LE(s, 1.0);
}

TEST(Pipeline, ReportsDoNotDependOnWorkers) {
  const fs::path b = scratch("b");
  Pipeline p(tiny(b, 3));
  run_all(p);
  EXPECT_EQ(read_dir(Workspace(b).report_dir()), read_dir(Workspace(first_run()).report_dir()));
  fs::remove_all(b);
}

TEST(Pipeline, CacheAndStaleness) {
  Pipeline p(tiny(first_run(), 2));
  const auto before = fs::last_write_time(Workspace(first_run()).model("plain"));
  p.train();  // up to date: no retraining
  EXPECT_EQ(fs::last_write_time(Workspace(first_run()).model("plain")), before);

  const auto [a, path_a] = p.attack("plain", ScenarioKind::Vanilla, "deepfool");
  const auto [b, path_b] = p.attack("plain", ScenarioKind::Vanilla, "deepfool");
  EXPECT_EQ(path_a, path_b);
  EXPECT_TRUE(fs::exists(path_a));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].adversarial, b[i].adversarial);
    EXPECT_EQ(a[i].success, b[i].success);
  }
  EXPECT_THROW(p.attack("plain", ScenarioKind::Vanilla, "nope"), ContractError);

  ExperimentConfig changed = tiny(first_run(), 1);
  changed.model.train.epochs = 4;
  EXPECT_THROW(Pipeline(changed).load_model("plain"), PathError);
  EXPECT_THROW(Pipeline(tiny(first_run(), 1)).load_model("adv"), ContractError);  // not in this config
}

TEST(Pipeline, ReportRefusesResultsFromAnotherConfig) {
  ExperimentConfig other = tiny(first_run(), 1);
  other.master_seed = 22;
  EXPECT_THROW(Pipeline(other).report(), Error);
}

TEST(Pipeline, MissingWorkspaceIsAPathError) {
  const fs::path d = scratch("empty");
  EXPECT_THROW(Pipeline(tiny(d, 1)).load_test(), PathError);
  EXPECT_THROW(Pipeline(tiny(d, 1)).train(), PathError);
}
