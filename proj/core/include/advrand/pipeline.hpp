#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "advrand/config.hpp"
#include "advrand/harness.hpp"

// Experiment stages over a workspace directory:
//
//   data/train.rast, data/test.rast
//   models/plain.w, models/adv.w          (+ .key files recording what produced them)
//   cache/<model>-<scenario>-<attack>-<hash>.rast  (+ .json with per-image attack outcomes)
//   results/evaluate.json, results/diagnose.json, results/sweep.json
//   report/*.csv, report/*.json, report/*.dat
//
// Every stage output embeds the resolved configuration. Nothing written
// depends on the worker count or on wall time.

namespace advrand {

class Workspace {
 public:
  explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}
  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path train_data() const { return root_ / "data" / "train.rast"; }
  std::filesystem::path test_data() const { return root_ / "data" / "test.rast"; }
  std::filesystem::path model(const std::string& id) const { return root_ / "models" / (id + ".w"); }
  std::filesystem::path cache_dir() const { return root_ / "cache"; }
  std::filesystem::path results(const std::string& stage) const { return root_ / "results" / (stage + ".json"); }
  std::filesystem::path report_dir() const { return root_ / "report"; }

 private:
  std::filesystem::path root_;
};

using Logger = std::function<void(const std::string&)>;

struct SweepCurve {
  std::string model;
  std::string scenario;  // "clean" for unattacked images
  std::string attack;
  std::size_t n_images = 0;
  std::vector<std::pair<std::size_t, double>> points;  // (iterations, accuracy)
};

struct ScoreFilter {
  std::string model;     // empty matches all
  std::string scenario;  // empty matches all
};

class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config, Logger log = {});

  const ExperimentConfig& config() const { return config_; }
  const Workspace& workspace() const { return ws_; }

  /// Writes the synthetic set, or copies and checks an external one.
  void gen_data(bool force = false);
  /// Trains "plain" and, when configured, "adv". Skips models whose key
  /// file matches the current data and model settings unless `force`.
  void train(bool force = false);

  /// Model ids present for this config, "plain" first.
  std::vector<std::string> model_ids() const;
  ModelWeights load_model(const std::string& id) const;
  LabeledDataset load_test() const;
  /// Test images classified correctly by every model.
  LabeledDataset evaluation_subset() const;

  ScenarioSpec scenario(ScenarioKind kind) const;
  /// The images a scenario is attacked on: a prefix of the evaluation
  /// subset, resized to pad_target - 1 for diagnostics.
  LabeledDataset scenario_data(ScenarioKind kind) const;

  /// Adversarials for (model, scenario, attack), read from the cache or
  /// generated and stored. Returns them with the cache file path.
  std::pair<std::vector<AttackResult>, std::filesystem::path> attack(const std::string& model_id, ScenarioKind kind,
                                                                    const std::string& attack_name);

  /// Clean and attacked rows for every model and scenario, the defense
  /// variants and the challenge defense; results/evaluate.json.
  std::vector<ScenarioReport> evaluate();
  /// One-pixel pad and resize runs; results/diagnose.json.
  std::vector<ScenarioReport> diagnose();
  /// Defense accuracy versus averaging count; results/sweep.json.
  std::vector<SweepCurve> sweep();
  /// Renders report/ from whatever results exist. Returns files written.
  std::vector<std::filesystem::path> report() const;

  /// Score filter for the challenge rows.
  ScoreFilter challenge_filter() const;

 private:
  std::string model_key() const;
  std::string challenge_model() const;
  RunOptions options(const std::string& model_id) const;
  void info(const std::string& message) const;

  ExperimentConfig config_;
  Workspace ws_;
  Logger log_;
  mutable std::optional<LabeledDataset> subset_;
};

/// Normalized score over the attacked rows (attack != "clean") that match
/// the filter. Throws ContractError when no row matches.
double score_reports(const std::vector<ScenarioReport>& reports, const ScoreFilter& filter);

std::string sweep_json(const std::vector<SweepCurve>& curves, const std::string& config_echo);
std::vector<SweepCurve> parse_sweep_json(std::string_view text);

/// The resolved configuration embedded in a report file: the leading "# "
/// lines of CSV or plot files, or the "config" field of JSON files.
std::string embedded_config(std::string_view report_text);

}  // namespace advrand
