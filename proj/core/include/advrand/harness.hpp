#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advrand/attacks.hpp"
#include "advrand/classifier.hpp"
#include "advrand/dataset.hpp"
#include "advrand/defense.hpp"
#include "advrand/pattern.hpp"

namespace advrand {

enum class ScenarioKind { Vanilla, SinglePattern, EnsemblePattern, OnePixelPad, OnePixelResize };

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(const std::string& text);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Vanilla;
  std::optional<PatternSpec> fixed_pattern;            // SinglePattern
  std::optional<std::vector<PatternSpec>> pattern_set;  // EnsemblePattern
  std::size_t defense_runs = 3;

  static ScenarioSpec vanilla(std::size_t runs = 3);
  static ScenarioSpec single_pattern(const PatternSpec& pattern, std::size_t runs = 3);
  static ScenarioSpec ensemble_pattern(std::vector<PatternSpec> patterns, std::size_t runs = 3);

  void validate() const;
  /// "vanilla", "single", "ensemble", "pad1" or "resize1".
  std::string id() const;
};

/// Per-image defense correctness, one row per defense run.
using CorrectnessMatrix = std::vector<std::vector<bool>>;

struct ScenarioReport {
  std::string model_id;
  std::string attack_id;
  std::string scenario_id;
  double target_accuracy = 0.0;
  std::vector<double> defense_accuracy_runs;
  double defense_accuracy_mean = 0.0;
  std::size_t n_images = 0;
  std::size_t attack_failures = 0;  // images whose attack raised an error
  double seconds = 0.0;             // wall time; never written to report files
  CorrectnessMatrix defense_correct;
};

/// Plain network.
TargetModel make_vanilla_target(const ModelWeights& weights);
/// Network behind one fixed pattern.
TargetModel make_single_pattern_target(const ModelWeights& weights, const PatternSpec& pattern, std::size_t pad_target);
/// Mean-loss ensemble over fixed patterns.
TargetModel make_ensemble_pattern_target(const ModelWeights& weights, const std::vector<PatternSpec>& patterns,
                                         std::size_t pad_target);

/// No resizing, image centred on the canvas. Throws ContractError when
/// pad_target - base_side is odd.
PatternSpec centered_pattern(const RandomizationParams& params);

/// Five evenly spaced sides from resize_min to pad_target, each placed at the
/// four corners and the centre; the largest side fills the canvas, so its
/// five placements collapse to one. 21 patterns for the default geometry.
std::vector<PatternSpec> default_ensemble_patterns(const RandomizationParams& params);

/// Fraction of (image, member) pairs the ensemble classifies correctly.
/// Throws ContractError unless `target` is an ensemble.
double ensemble_target_accuracy(const TargetModel& target, const std::vector<Image>& images,
                                const std::vector<std::uint32_t>& labels, std::size_t workers = 1);

/// Adversarial images as evaluated: rounded to float32, as stored in caches.
std::vector<Image> evaluation_images(const std::vector<AttackResult>& results);

/// Builds the attacker's target for a scenario.
TargetModel scenario_target(const ModelWeights& weights, const ScenarioSpec& scenario,
                            const RandomizationParams& params);

struct RunOptions {
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  std::string model_id = "model";
};

/// Attacks every image against the scenario's target.
std::vector<AttackResult> generate_adversarials(const ModelWeights& weights, const ScenarioSpec& scenario,
                                                const AttackConfig& attack, const LabeledDataset& data,
                                                const RandomizationParams& params, std::size_t workers);

/// Scores precomputed adversarials: target accuracy (per member for
/// ensembles) and `defense_runs` independent randomised defense passes.
ScenarioReport evaluate_scenario(const ModelWeights& weights, const ScenarioSpec& scenario, const AttackConfig& attack,
                                 const LabeledDataset& data, const std::vector<AttackResult>& adversarials,
                                 const DefenseConfig& defense, const RunOptions& options);

/// generate_adversarials followed by evaluate_scenario.
ScenarioReport run_scenario(const ModelWeights& weights, const ScenarioSpec& scenario, const AttackConfig& attack,
                            const LabeledDataset& data, const DefenseConfig& defense, const RunOptions& options);

/// Clean images through the bare model ("target") and the defense.
ScenarioReport evaluate_clean(const ModelWeights& weights, const LabeledDataset& data, const DefenseConfig& defense,
                              std::size_t runs, const RunOptions& options);

/// Defense accuracy on `images` for each averaging count, one run each.
std::vector<std::pair<std::size_t, double>> iteration_sweep(const ModelWeights& weights, const std::vector<Image>& images,
                                                            const std::vector<std::uint32_t>& labels,
                                                            const RandomizationParams& params,
                                                            const std::vector<std::size_t>& counts,
                                                            const RunOptions& options);

/// Images of side pad_target - 1. Target: ensemble of the top-left,
/// top-right and bottom-left placements on the pad_target canvas. Defense:
/// the bottom-right placement, run once.
ScenarioReport run_diagnostic_one_pixel_pad(const ModelWeights& weights, const AttackConfig& attack,
                                            const LabeledDataset& data, std::size_t pad_target,
                                            const RunOptions& options);

/// Images of side pad_target - 1. Target: the plain network at that side.
/// Defense: resize to pad_target, run once.
ScenarioReport run_diagnostic_one_pixel_resize(const ModelWeights& weights, const AttackConfig& attack,
                                               const LabeledDataset& data, std::size_t pad_target,
                                               const RunOptions& options);

/// Defense of a diagnostic scenario: one fixed pattern on the pad_target
/// canvas (bottom-right placement for pad1, resize to pad_target for resize1).
DefenseConfig diagnostic_defense(ScenarioKind kind, std::size_t pad_target);

/// Total correct defense predictions over total predictions across all
/// matrices. Throws ContractError when there are none.
double normalized_score(const std::vector<CorrectnessMatrix>& matrices);

}  // namespace advrand
