#include <gtest/gtest.h>

#include "advrand/errors.hpp"
#include "advrand/harness.hpp"
#include "advrand/image_ops.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace advrand;

namespace {

LabeledDataset correct_subset(std::size_t n) {
  const auto& t = fixtures::small_trained();
  return select_correct_subset({&t.weights}, t.test, n, 2);
}

}  // namespace

TEST(Score, Fixtures) {
  for (const auto& o : oracles::score_checks()) EXPECT_TRUE(o.pass) << o.name << ": " << o.detail;
}

TEST(Scenario, IdsKindsAndValidation) {
  EXPECT_EQ(ScenarioSpec::vanilla().id(), "vanilla");
  EXPECT_EQ(ScenarioSpec::single_pattern(PatternSpec::geometric(28, 4, 4)).id(), "single");
  EXPECT_EQ(ScenarioSpec::ensemble_pattern({PatternSpec::geometric(28, 0, 0)}).id(), "ensemble");
  for (auto k : {ScenarioKind::Vanilla, ScenarioKind::SinglePattern, ScenarioKind::EnsemblePattern,
                 ScenarioKind::OnePixelPad, ScenarioKind::OnePixelResize})
    EXPECT_EQ(parse_scenario_kind(to_string(k)), k);
  EXPECT_EQ(to_string(ScenarioKind::OnePixelPad), "pad1");
  EXPECT_EQ(to_string(ScenarioKind::OnePixelResize), "resize1");
  ScenarioSpec s;
  s.kind = ScenarioKind::SinglePattern;
  EXPECT_THROW(s.validate(), ContractError);
  EXPECT_THROW(ScenarioSpec::ensemble_pattern({}).validate(), ContractError);
  EXPECT_THROW(ScenarioSpec::vanilla(0).validate(), ContractError);
}

TEST(Scenario, SinglePatternTargetSeesThePattern) {
  const auto& t = fixtures::small_trained();
  const PatternSpec p = PatternSpec::geometric(28, 4, 4);
  const TargetModel target = make_single_pattern_target(t.weights, p, 36);
  for (std::size_t i = 0; i < 5; ++i) {
    const Image& x = t.test.images[i];
    EXPECT_EQ(target.predict_each(x).front(), predict(t.weights, apply_pattern(x, p, 36)));
  }
}

TEST(Scenario, EnsembleTargetAccuracyCountsImageMemberPairs) {
  const auto& t = fixtures::small_trained();
  const std::vector<PatternSpec> set = default_ensemble_patterns(RandomizationParams{});
  const TargetModel target = make_ensemble_pattern_target(t.weights, set, 36);
  std::vector<Image> images(t.test.images.begin(), t.test.images.begin() + 8);
  std::vector<std::uint32_t> labels(t.test.labels.begin(), t.test.labels.begin() + 8);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < images.size(); ++i)
    for (const PatternSpec& p : set) hits += predict(t.weights, apply_pattern(images[i], p, 36)) == labels[i];
  EXPECT_DOUBLE_EQ(ensemble_target_accuracy(target, images, labels, 2), static_cast<double>(hits) / (8.0 * 21.0));
  EXPECT_THROW(ensemble_target_accuracy(make_vanilla_target(t.weights), images, labels), ContractError);
}

TEST(Scenario, EvaluationImagesAreFloat32) {
  AttackResult r;
  r.adversarial = Tensor({1, 1, 1}, {0.1});
  const auto im = evaluation_images({r});
  EXPECT_EQ(im[0][0], static_cast<double>(0.1f));
}

TEST(Harness, ReportShapeAndConsistency) {
  const auto& t = fixtures::small_trained();
  const LabeledDataset data = correct_subset(12);
  DefenseConfig d;
  RunOptions opt{9, 1, "fixture"};
  const ScenarioReport r = run_scenario(t.weights, ScenarioSpec::vanilla(3), AttackConfig::fgsm(8.0 / 255.0), data, d, opt);
  EXPECT_EQ(r.model_id, "fixture");
  EXPECT_EQ(r.attack_id, "fgsm-eps8");
  EXPECT_EQ(r.scenario_id, "vanilla");
  EXPECT_EQ(r.n_images, 12u);
  ASSERT_EQ(r.defense_correct.size(), 3u);
  ASSERT_EQ(r.defense_accuracy_runs.size(), 3u);
  double mean = 0;
  for (std::size_t run = 0; run < 3; ++run) {
    ASSERT_EQ(r.defense_correct[run].size(), 12u);
    std::size_t ok = 0;
    for (bool b : r.defense_correct[run]) ok += b;
    EXPECT_DOUBLE_EQ(r.defense_accuracy_runs[run], ok / 12.0);
    mean += r.defense_accuracy_runs[run] / 3.0;
  }
  EXPECT_NEAR(r.defense_accuracy_mean, mean, 1e-15);

  // target accuracy recomputed from the stored adversarials
  const auto advs = generate_adversarials(t.weights, ScenarioSpec::vanilla(3), AttackConfig::fgsm(8.0 / 255.0), data, d.params, 1);
  const auto images = evaluation_images(advs);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < 12; ++i) ok += predict(t.weights, images[i]) == data.labels[i];
  EXPECT_DOUBLE_EQ(r.target_accuracy, ok / 12.0);
}

TEST(Harness, ResultsDoNotDependOnWorkers) {
  const auto& t = fixtures::small_trained();
  const LabeledDataset data = correct_subset(10);
  const DefenseConfig d;
  const ScenarioSpec s = ScenarioSpec::single_pattern(centered_pattern(d.params), 2);
  const auto a = run_scenario(t.weights, s, AttackConfig::deepfool(), data, d, RunOptions{4, 1, "m"});
  const auto b = run_scenario(t.weights, s, AttackConfig::deepfool(), data, d, RunOptions{4, 4, "m"});
  EXPECT_EQ(a.defense_correct, b.defense_correct);
  EXPECT_EQ(a.target_accuracy, b.target_accuracy);
  const auto c = run_scenario(t.weights, s, AttackConfig::deepfool(), data, d, RunOptions{5, 1, "m"});
  EXPECT_EQ(a.target_accuracy, c.target_accuracy);  // the attack does not use the master seed
}

TEST(Harness, CleanRowsOnTheCorrectSubset) {
  const auto& t = fixtures::small_trained();
  const LabeledDataset data = correct_subset(20);
  const ScenarioReport r = evaluate_clean(t.weights, data, DefenseConfig{}, 2, RunOptions{1, 2, "m"});
  EXPECT_EQ(r.attack_id, "clean");
  EXPECT_EQ(r.target_accuracy, 1.0);
  EXPECT_EQ(r.defense_correct.size(), 2u);
}

TEST(Harness, SweepRunsEveryCount) {
  const auto& t = fixtures::small_trained();
  std::vector<Image> images(t.test.images.begin(), t.test.images.begin() + 20);
  std::vector<std::uint32_t> labels(t.test.labels.begin(), t.test.labels.begin() + 20);
  const auto a = iteration_sweep(t.weights, images, labels, RandomizationParams{}, {1, 3, 5}, RunOptions{6, 1, "m"});
  const auto b = iteration_sweep(t.weights, images, labels, RandomizationParams{}, {1, 3, 5}, RunOptions{6, 3, "m"});
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[2].first, 5u);
  EXPECT_EQ(a, b);
  // identity params make every count agree with the plain model
  const auto id = iteration_sweep(t.weights, images, labels, RandomizationParams::identity(28), {1, 5}, RunOptions{});
  std::size_t ok = 0;
  for (std::size_t i = 0; i < 20; ++i) ok += predict(t.weights, images[i]) == labels[i];
  EXPECT_DOUBLE_EQ(id[0].second, ok / 20.0);
  EXPECT_DOUBLE_EQ(id[1].second, ok / 20.0);
}

TEST(Harness, DiagnosticsGeometry) {
  const DefenseConfig pad = diagnostic_defense(ScenarioKind::OnePixelPad, 36);
  EXPECT_EQ(count_patterns(pad.params), 4u);
  const DefenseConfig res = diagnostic_defense(ScenarioKind::OnePixelResize, 36);
  EXPECT_EQ(count_patterns(res.params), 1u);
  EXPECT_THROW(diagnostic_defense(ScenarioKind::Vanilla, 36), ContractError);

  const auto& t = fixtures::small_trained();
  const LabeledDataset wrong_side = correct_subset(2);
  EXPECT_THROW(run_diagnostic_one_pixel_pad(t.weights, AttackConfig::fgsm(0.01), wrong_side, 36, RunOptions{}),
               DimensionError);
  const LabeledDataset data = resize_dataset(correct_subset(4), 35);
  const auto r = run_diagnostic_one_pixel_resize(t.weights, AttackConfig::fgsm(0.01), data, 36, RunOptions{});
  EXPECT_EQ(r.scenario_id, "resize1");
  EXPECT_EQ(r.defense_correct.size(), 1u);
  const auto p = run_diagnostic_one_pixel_pad(t.weights, AttackConfig::fgsm(0.01), data, 36, RunOptions{});
  EXPECT_EQ(p.scenario_id, "pad1");
  EXPECT_EQ(p.defense_correct.size(), 1u);
}

TEST(Harness, DiagnosticPadDefenseIsTheHeldOutCorner) {
  // The defense never sees the attacker's three placements: its result on an
  // image must equal the bottom-right placement's prediction.
  const auto& t = fixtures::small_trained();
  const LabeledDataset data = resize_dataset(correct_subset(6), 35);
  std::vector<AttackResult> none;
  for (const Image& im : data.images) {
    AttackResult r;
    r.adversarial = quantize_f32(im);
    r.perturbation = Tensor(im.shape());
    none.push_back(r);
  }
  ScenarioSpec s;
  s.kind = ScenarioKind::OnePixelPad;
  const auto rep = evaluate_scenario(t.weights, s, AttackConfig::fgsm(0.0), data, none,
                                     diagnostic_defense(ScenarioKind::OnePixelPad, 36), RunOptions{});
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool ok = predict(t.weights, apply_pattern(none[i].adversarial, PatternSpec::geometric(35, 1, 1), 36)) ==
                    data.labels[i];
    EXPECT_EQ(rep.defense_correct[0][i], ok);
  }
}
