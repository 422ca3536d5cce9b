#include "advrand/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "advrand/errors.hpp"
#include "advrand/ops.hpp"
#include "advrand/parallel.hpp"

namespace advrand {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Vanilla: return "vanilla";
    case ScenarioKind::SinglePattern: return "single";
    case ScenarioKind::EnsemblePattern: return "ensemble";
    case ScenarioKind::OnePixelPad: return "pad1";
    case ScenarioKind::OnePixelResize: return "resize1";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(const std::string& text) {
  for (ScenarioKind k : {ScenarioKind::Vanilla, ScenarioKind::SinglePattern, ScenarioKind::EnsemblePattern,
                         ScenarioKind::OnePixelPad, ScenarioKind::OnePixelResize}) {
    if (to_string(k) == text) return k;
  }
  throw ContractError("unknown scenario '" + text + "' (expected vanilla, single, ensemble, pad1 or resize1)");
}

ScenarioSpec ScenarioSpec::vanilla(std::size_t runs) {
  ScenarioSpec s;
  s.defense_runs = runs;
  return s;
}

ScenarioSpec ScenarioSpec::single_pattern(const PatternSpec& pattern, std::size_t runs) {
  ScenarioSpec s;
  s.kind = ScenarioKind::SinglePattern;
  s.fixed_pattern = pattern;
  s.defense_runs = runs;
  return s;
}

ScenarioSpec ScenarioSpec::ensemble_pattern(std::vector<PatternSpec> patterns, std::size_t runs) {
  ScenarioSpec s;
  s.kind = ScenarioKind::EnsemblePattern;
  s.pattern_set = std::move(patterns);
  s.defense_runs = runs;
  return s;
}

void ScenarioSpec::validate() const {
  if (defense_runs == 0) throw ContractError("scenario defense_runs must be at least 1");
  if (kind == ScenarioKind::SinglePattern && !fixed_pattern) {
    throw ContractError("single-pattern scenario needs a fixed pattern");
  }
  if (kind == ScenarioKind::EnsemblePattern && (!pattern_set || pattern_set->empty())) {
    throw ContractError("ensemble-pattern scenario needs a non-empty pattern set");
  }
}

std::string ScenarioSpec::id() const { return to_string(kind); }

namespace {

LogitsFn bare_logits(const ModelWeights& weights) {
  return [&weights](Tape& tape, const Var& image) { return forward_logits(bind(tape, weights, false), image); };
}

LogitsFn pattern_logits(const ModelWeights& weights, const PatternSpec& pattern, std::size_t pad_target) {
  pattern.validate(pad_target);
  return [&weights, pattern, pad_target](Tape& tape, const Var& image) {
    return forward_logits(bind(tape, weights, false), apply_pattern(image, pattern, pad_target));
  };
}

bool is_diagnostic(ScenarioKind kind) {
  return kind == ScenarioKind::OnePixelPad || kind == ScenarioKind::OnePixelResize;
}

std::vector<PatternSpec> pad_probe_patterns(std::size_t pad_target) {
  const std::size_t side = pad_target - 1;
  return {PatternSpec::geometric(side, 0, 0), PatternSpec::geometric(side, 1, 0), PatternSpec::geometric(side, 0, 1)};
}

PatternSpec diagnostic_defense_pattern(ScenarioKind kind, std::size_t pad_target) {
  if (kind == ScenarioKind::OnePixelPad) return PatternSpec::geometric(pad_target - 1, 1, 1);
  return PatternSpec::geometric(pad_target, 0, 0);
}

double fraction(std::size_t count, std::size_t total) {
  return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void check_data(const LabeledDataset& data) {
  if (data.images.size() != data.labels.size()) throw ContractError("dataset image and label counts differ");
}

}  // namespace

TargetModel make_vanilla_target(const ModelWeights& weights) { return TargetModel::single(bare_logits(weights)); }

TargetModel make_single_pattern_target(const ModelWeights& weights, const PatternSpec& pattern,
                                       std::size_t pad_target) {
  return TargetModel::single(pattern_logits(weights, pattern, pad_target));
}

TargetModel make_ensemble_pattern_target(const ModelWeights& weights, const std::vector<PatternSpec>& patterns,
                                         std::size_t pad_target) {
  if (patterns.empty()) throw ContractError("ensemble target needs at least one pattern");
  std::vector<LogitsFn> members;
  for (const PatternSpec& p : patterns) members.push_back(pattern_logits(weights, p, pad_target));
  return TargetModel::ensemble(std::move(members));
}

PatternSpec centered_pattern(const RandomizationParams& params) {
  if (params.pad_target < params.base_side) throw ContractError("pad target is smaller than the base side");
  const std::size_t slack = params.pad_target - params.base_side;
  if (slack % 2 != 0) {
    throw ContractError("cannot centre a " + std::to_string(params.base_side) + " image on a " +
                        std::to_string(params.pad_target) + " canvas; give explicit offsets");
  }
  return PatternSpec::geometric(params.base_side, slack / 2, slack / 2);
}

std::vector<PatternSpec> default_ensemble_patterns(const RandomizationParams& params) {
  params.validate();
  const std::size_t lo = params.resize_min, T = params.pad_target;
  std::vector<PatternSpec> out;
  for (std::size_t j = 0; j < 5; ++j) {
    const std::size_t side = lo + static_cast<std::size_t>(std::lround(static_cast<double>(j * (T - lo)) / 4.0));
    const std::size_t d = T - side;
    const PatternSpec candidates[] = {PatternSpec::geometric(side, 0, 0), PatternSpec::geometric(side, d, 0),
                                      PatternSpec::geometric(side, 0, d), PatternSpec::geometric(side, d, d),
                                      PatternSpec::geometric(side, d / 2, d / 2)};
    for (const PatternSpec& p : candidates)
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

double ensemble_target_accuracy(const TargetModel& target, const std::vector<Image>& images,
                                const std::vector<std::uint32_t>& labels, std::size_t workers) {
  if (!target.is_ensemble()) throw ContractError("ensemble_target_accuracy needs an ensemble target");
  if (images.size() != labels.size()) throw ContractError("image and label counts differ");
  std::vector<std::size_t> correct(images.size(), 0);
  parallel_for(images.size(), workers, [&](std::size_t i) {
    for (std::size_t p : target.predict_each(images[i])) correct[i] += p == labels[i];
  });
  std::size_t total = 0;
  for (std::size_t c : correct) total += c;
  return fraction(total, images.size() * target.member_count());
}

std::vector<Image> evaluation_images(const std::vector<AttackResult>& results) {
  std::vector<Image> out;
  out.reserve(results.size());
  for (const AttackResult& r : results) out.push_back(quantize_f32(r.adversarial));
  return out;
}

TargetModel scenario_target(const ModelWeights& weights, const ScenarioSpec& scenario,
                            const RandomizationParams& params) {
  scenario.validate();
  switch (scenario.kind) {
    case ScenarioKind::Vanilla:
    case ScenarioKind::OnePixelResize: return make_vanilla_target(weights);
    case ScenarioKind::SinglePattern:
      return make_single_pattern_target(weights, *scenario.fixed_pattern, params.pad_target);
    case ScenarioKind::EnsemblePattern:
      return make_ensemble_pattern_target(weights, *scenario.pattern_set, params.pad_target);
    case ScenarioKind::OnePixelPad:
      return make_ensemble_pattern_target(weights, pad_probe_patterns(params.pad_target), params.pad_target);
  }
  throw ContractError("unknown scenario kind");
}

std::vector<AttackResult> generate_adversarials(const ModelWeights& weights, const ScenarioSpec& scenario,
                                                const AttackConfig& attack, const LabeledDataset& data,
                                                const RandomizationParams& params, std::size_t workers) {
  check_data(data);
  return attack_batch(attack, scenario_target(weights, scenario, params), data, workers);
}

ScenarioReport evaluate_scenario(const ModelWeights& weights, const ScenarioSpec& scenario, const AttackConfig& attack,
                                 const LabeledDataset& data, const std::vector<AttackResult>& adversarials,
                                 const DefenseConfig& defense, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  scenario.validate();
  defense.validate();
  check_data(data);
  if (adversarials.size() != data.size()) {
    throw ContractError("got " + std::to_string(adversarials.size()) + " adversarial results for " +
                        std::to_string(data.size()) + " images");
  }
  const std::size_t n = data.size();
  const std::vector<Image> images = evaluation_images(adversarials);
  const TargetModel target = scenario_target(weights, scenario, defense.params);

  ScenarioReport report;
  report.model_id = options.model_id;
  report.attack_id = attack.id();
  report.scenario_id = scenario.id();
  report.n_images = n;
  for (const AttackResult& r : adversarials) report.attack_failures += !r.error.empty();

  if (target.is_ensemble()) {
    report.target_accuracy = ensemble_target_accuracy(target, images, data.labels, options.workers);
  } else {
    std::vector<std::uint8_t> ok(n, 0);
    parallel_for(n, options.workers,
                 [&](std::size_t i) { ok[i] = target.predict_each(images[i]).front() == data.labels[i]; });
    report.target_accuracy = fraction(static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1)), n);
  }

  const bool diagnostic = is_diagnostic(scenario.kind);
  const std::size_t runs = diagnostic ? 1 : scenario.defense_runs;
  const std::uint64_t scenario_hash = hash_string(scenario.id());
  for (std::size_t run = 0; run < runs; ++run) {
    std::vector<std::uint8_t> ok(n, 0);
    parallel_for(n, options.workers, [&](std::size_t i) {
      std::size_t label;
      if (diagnostic) {
        const std::size_t T = defense.params.pad_target;
        label = argmax(pattern_probabilities(weights, images[i], diagnostic_defense_pattern(scenario.kind, T), T));
      } else {
        Rng rng(derive_seed({options.master_seed, i, run, scenario_hash}));
        label = randomized_predict(weights, images[i], defense.params, defense.n_iterations, rng).label;
      }
      ok[i] = label == data.labels[i];
    });
    report.defense_correct.emplace_back(ok.begin(), ok.end());
    report.defense_accuracy_runs.push_back(fraction(static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1)), n));
  }
  report.defense_accuracy_mean = mean(report.defense_accuracy_runs);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ScenarioReport run_scenario(const ModelWeights& weights, const ScenarioSpec& scenario, const AttackConfig& attack,
                            const LabeledDataset& data, const DefenseConfig& defense, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  defense.validate();
  const auto adversarials = generate_adversarials(weights, scenario, attack, data, defense.params, options.workers);
  ScenarioReport report = evaluate_scenario(weights, scenario, attack, data, adversarials, defense, options);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ScenarioReport evaluate_clean(const ModelWeights& weights, const LabeledDataset& data, const DefenseConfig& defense,
                              std::size_t runs, const RunOptions& options) {
  std::vector<AttackResult> unchanged(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) unchanged[i].adversarial = data.images[i];
  AttackConfig none = AttackConfig::fgsm(0.0);
  ScenarioReport report = evaluate_scenario(weights, ScenarioSpec::vanilla(runs), none, data, unchanged, defense, options);
  report.attack_id = "clean";
  return report;
}

std::vector<std::pair<std::size_t, double>> iteration_sweep(const ModelWeights& weights, const std::vector<Image>& images,
                                                            const std::vector<std::uint32_t>& labels,
                                                            const RandomizationParams& params,
                                                            const std::vector<std::size_t>& counts,
                                                            const RunOptions& options) {
  if (images.size() != labels.size()) throw ContractError("image and label counts differ");
  const std::uint64_t sweep_hash = hash_string("sweep");
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t count : counts) {
    if (count == 0) throw ContractError("iteration counts must be positive");
    std::vector<std::uint8_t> ok(images.size(), 0);
    parallel_for(images.size(), options.workers, [&](std::size_t i) {
      Rng rng(derive_seed({options.master_seed, i, count, sweep_hash}));
      ok[i] = randomized_predict(weights, images[i], params, count, rng).label == labels[i];
    });
    out.emplace_back(count, fraction(static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1)), images.size()));
  }
  return out;
}

namespace {

ScenarioReport run_diagnostic(ScenarioKind kind, const ModelWeights& weights, const AttackConfig& attack,
                              const LabeledDataset& data, std::size_t pad_target, const RunOptions& options) {
  if (pad_target < 2) throw ContractError("diagnostic pad target must be at least 2");
  for (const Image& im : data.images) {
    if (im.rank() != 3 || im.dim(0) != pad_target - 1 || im.dim(1) != pad_target - 1) {
      throw DimensionError("diagnostic images must be " + std::to_string(pad_target - 1) + " pixels square, got " +
                           shape_string(im.shape()));
    }
  }
  const DefenseConfig defense = diagnostic_defense(kind, pad_target);
  ScenarioSpec scenario;
  scenario.kind = kind;
  scenario.defense_runs = 1;
  return run_scenario(weights, scenario, attack, data, defense, options);
}

}  // namespace

DefenseConfig diagnostic_defense(ScenarioKind kind, std::size_t pad_target) {
  if (!is_diagnostic(kind)) throw ContractError("not a diagnostic scenario: " + to_string(kind));
  if (pad_target < 2) throw ContractError("diagnostic pad target must be at least 2");
  DefenseConfig defense;
  defense.params = RandomizationParams::identity(pad_target - 1);
  defense.params.resize_max_exclusive = pad_target;
  defense.params.pad_target = pad_target;
  if (kind == ScenarioKind::OnePixelResize) {
    defense.params.resize_min = pad_target;
    defense.params.resize_max_exclusive = pad_target + 1;
  }
  return defense;
}

ScenarioReport run_diagnostic_one_pixel_pad(const ModelWeights& weights, const AttackConfig& attack,
                                            const LabeledDataset& data, std::size_t pad_target,
                                            const RunOptions& options) {
  return run_diagnostic(ScenarioKind::OnePixelPad, weights, attack, data, pad_target, options);
}

ScenarioReport run_diagnostic_one_pixel_resize(const ModelWeights& weights, const AttackConfig& attack,
                                               const LabeledDataset& data, std::size_t pad_target,
                                               const RunOptions& options) {
  return run_diagnostic(ScenarioKind::OnePixelResize, weights, attack, data, pad_target, options);
}

double normalized_score(const std::vector<CorrectnessMatrix>& matrices) {
  std::size_t correct = 0, total = 0;
  for (const CorrectnessMatrix& m : matrices) {
    for (const std::vector<bool>& row : m) {
      if (row.size() != m.front().size()) throw ContractError("correctness rows have inconsistent image counts");
      correct += static_cast<std::size_t>(std::count(row.begin(), row.end(), true));
      total += row.size();
    }
  }
  if (total == 0) throw ContractError("normalized_score needs at least one adversarial example");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace advrand
