#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "advrand/attacks.hpp"
#include "advrand/classifier.hpp"
#include "advrand/dataset.hpp"
#include "advrand/defense.hpp"
#include "advrand/harness.hpp"

// Experiment configuration text format:
//
//   # comment            ; comment
//   key = value          top-level keys before any section
//   [section]            data, model, defense, evaluate, diagnose, sweep
//   [attack.NAME]        one block per attack, in file order
//
// Numbers may be written as ratios ("5/255"). Lists are comma separated.
// Booleans are true/false. A colour jitter key set to "off" disables it.
// Every key has a default; see resolved() for the full list.

namespace advrand {

struct DataSection {
  std::string source = "synthetic";  // "synthetic" or a directory holding train.rast / test.rast
  SyntheticSpec synthetic;
};

struct ModelSection {
  ModelArch arch;
  std::uint64_t init_seed = 7;
  TrainConfig train = default_train();  // on_epoch is never set from text
  bool adversarial = true;  // also train the adversarially trained variant
  AdversarialMix mix{{2.0 / 255.0, 5.0 / 255.0, 10.0 / 255.0}, 0.5};

  /// 15 epochs; half the samples go through a random resize+pad pattern and
  /// half through random colour jitter.
  static TrainConfig default_train();
};

struct NamedAttack {
  std::string name;
  AttackConfig config;
};

struct EvaluateSection {
  std::size_t n_images = 500;
  std::size_t ensemble_images = 100;  // ensemble scenarios are ~20x dearer per image
  std::uint64_t subset_seed = 3;
  std::vector<ScenarioKind> scenarios{ScenarioKind::Vanilla, ScenarioKind::SinglePattern,
                                      ScenarioKind::EnsemblePattern};
  std::size_t defense_runs = 3;
  // Defense variants scored on vanilla adversarials of `variant_attack` and
  // on clean images: each colour jitter alone, each jitter on top of
  // resize+pad ("brightness++" etc.), all four on top of resize+pad
  // ("all++"), and downscaling to [downscale_min, base_side).
  bool variants = true;
  std::string variant_attack = "cw";
  std::size_t downscale_min = 20;
};

struct DiagnoseSection {
  std::size_t n_images = 100;
  std::vector<std::string> attacks{"deepfool", "cw"};  // attack names
};

struct SweepSection {
  std::vector<std::size_t> counts{1, 5, 10, 20, 30};
  std::string attack = "deepfool";  // attack whose adversarials are swept, per scenario
  std::size_t n_images = 200;       // prefix of the evaluation subset
};

/// Defense used for the normalized score: shifted resize range, random
/// flips and averaging over many patterns, in front of `model`.
struct ChallengeSection {
  bool enabled = true;
  std::string model = "adv";  // "adv" falls back to "plain" when no adversarial model is trained
  std::size_t resize_min = 31;
  double flip_prob = 0.5;
  std::size_t n_iterations = 30;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 2017;
  std::size_t workers = 1;
  std::string output = "out";
  DataSection data;
  ModelSection model;
  DefenseConfig defense;
  std::vector<NamedAttack> attacks = default_attacks();
  EvaluateSection evaluate;
  DiagnoseSection diagnose;
  SweepSection sweep;
  ChallengeSection challenge;

  static std::vector<NamedAttack> default_attacks();

  /// Cross-field checks; throws ContractError.
  void validate() const;
  const NamedAttack& attack(const std::string& name) const;
  /// The main defense with the resize range moved below the base side and
  /// the canvas shrunk to it.
  DefenseConfig downscale_defense() const;
  DefenseConfig challenge_defense() const;
  /// Complete configuration in the text format. parse_config(resolved())
  /// reproduces this object. Runtime-only fields (workers, output) are left
  /// out so that echoes do not depend on them.
  std::string resolved() const;
};

/// `overrides` are "section.key=value" (or "key=value" for top-level keys,
/// "attack.NAME.key=value" for attacks) and win over the text.
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Parses "0.5", "5/255", "-1e-3".
double parse_number(std::string_view text);

}  // namespace advrand
