#include "advrand/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "advrand/errors.hpp"
#include "advrand/io.hpp"
#include "advrand/report.hpp"

namespace advrand {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", s);
  return buf;
}

// Text of one "[name]" block of the resolved config.
std::string section_text(const std::string& resolved, const std::string& name) {
  const std::string head = "[" + name + "]\n";
  const std::size_t at = resolved.find(head);
  if (at == std::string::npos) return {};
  const std::size_t end = resolved.find("\n\n", at);
  return resolved.substr(at, end == std::string::npos ? std::string::npos : end - at);
}

bool key_matches(const fs::path& artifact, const std::string& key) {
  fs::path key_file = artifact;
  key_file += ".key";
  if (!fs::exists(artifact) || !fs::exists(key_file)) return false;
  return read_file(key_file) == key;
}

void write_with_key(const fs::path& artifact, const std::string& bytes, const std::string& key) {
  write_file(artifact, bytes);
  fs::path key_file = artifact;
  key_file += ".key";
  write_file(key_file, key);
}

LabeledDataset prefix(const LabeledDataset& data, std::size_t n) {
  std::vector<std::size_t> idx(std::min(n, data.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  LabeledDataset out = data.subset(idx);
  out.split = data.split;
  return out;
}

std::string describe(const ScenarioSpec& s, const RandomizationParams& p) {
  std::string out = s.id() + " T=" + std::to_string(p.pad_target);
  if (s.fixed_pattern) out += " " + s.fixed_pattern->describe();
  if (s.pattern_set)
    for (const PatternSpec& q : *s.pattern_set) out += " " + q.describe();
  return out;
}

AttackResult rebuild(const Image& clean, const Image& adv, const json& meta) {
  AttackResult r;
  r.adversarial = adv;
  r.perturbation = Tensor(adv.shape());
  double l2 = 0.0, linf = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const double d = adv.data()[i] - clean.data()[i];
    r.perturbation.data()[i] = d;
    l2 += d * d;
    linf = std::max(linf, std::abs(d));
  }
  r.perturbation_l2 = std::sqrt(l2);
  r.perturbation_linf = linf;
  r.success = meta.at("success").get<bool>();
  r.iterations_used = meta.at("iterations").get<std::size_t>();
  r.error = meta.at("error").get<std::string>();
  return r;
}

// Runs a defense over precomputed adversarials under another row name.
ScenarioReport defend(const ModelWeights& w, const ScenarioSpec& scenario, const LabeledDataset& data,
                      const std::vector<AttackResult>& advs, const DefenseConfig& defense, const RunOptions& opt,
                      const std::string& attack_name, const std::string& scenario_id) {
  ScenarioReport r = evaluate_scenario(w, scenario, AttackConfig::fgsm(0.0), data, advs, defense, opt);
  r.attack_id = attack_name;
  r.scenario_id = scenario_id;
  return r;
}

ScenarioReport defend_clean(const ModelWeights& w, const LabeledDataset& data, const DefenseConfig& defense,
                            std::size_t runs, const RunOptions& opt, const std::string& scenario_id) {
  ScenarioReport r = evaluate_clean(w, data, defense, runs, opt);
  r.scenario_id = scenario_id;
  return r;
}

std::string file_stem(const std::string& scenario_id) {
  std::string out;
  for (char c : scenario_id) {
    if (c == '/') out += '_';
    else if (c == '+') out += "plus";
    else out += c;
  }
  return out;
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig config, Logger log)
    : config_(std::move(config)), ws_(config_.output), log_(std::move(log)) {
  config_.validate();
}

void Pipeline::info(const std::string& message) const {
  if (log_) log_(message);
}

RunOptions Pipeline::options(const std::string& model_id) const {
  return RunOptions{config_.master_seed, config_.workers, model_id};
}

void Pipeline::gen_data(bool force) {
  const std::string key = section_text(config_.resolved(), "data");
  if (!force && key_matches(ws_.train_data(), key) && key_matches(ws_.test_data(), key)) {
    info("data: up to date");
    return;
  }
  const auto start = std::chrono::steady_clock::now();
  LabeledDataset train_set, test_set;
  if (config_.data.source == "synthetic") {
    std::tie(train_set, test_set) = generate_synthetic(config_.data.synthetic);
  } else {
    const fs::path dir = config_.data.source;
    train_set = load_raster(dir / "train.rast");
    test_set = load_raster(dir / "test.rast");
    for (const LabeledDataset* d : {&train_set, &test_set}) {
      if (d->labels.size() != d->size()) throw FormatError("external raster files must carry labels");
      if (d->empty()) throw FormatError("external raster file holds no images");
      const Shape want{config_.data.synthetic.side, config_.data.synthetic.side, config_.data.synthetic.channels};
      if (d->images.front().shape() != want) {
        throw FormatError("external images are " + shape_string(d->images.front().shape()) + ", config expects " +
                          shape_string(want));
      }
      try {
        d->validate(config_.model.arch.num_classes);
      } catch (const Error& e) {
        throw FormatError(std::string("external dataset: ") + e.what());
      }
    }
  }
  write_with_key(ws_.train_data(), encode_raster(train_set, true), key);
  write_with_key(ws_.test_data(), encode_raster(test_set, true), key);
  info("data: " + std::to_string(train_set.size()) + " train, " + std::to_string(test_set.size()) + " test images (" +
       fmt_seconds(seconds_since(start)) + ")");
}

std::string Pipeline::model_key() const {
  const std::string resolved = config_.resolved();
  return content_hash(read_file(ws_.train_data())) + "\n" + section_text(resolved, "model") + "\n";
}

void Pipeline::train(bool force) {
  const LabeledDataset train_set = load_raster(ws_.train_data());
  const std::string key = model_key();
  const ModelWeights init = init_model(config_.model.arch, config_.model.init_seed);
  std::vector<std::string> ids{"plain"};
  if (config_.model.adversarial) ids.push_back("adv");
  for (const std::string& id : ids) {
    if (!force && key_matches(ws_.model(id), key)) {
      info("train " + id + ": up to date");
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    TrainConfig cfg = config_.model.train;
    cfg.on_epoch = [&](const EpochStats& s) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "train %s: epoch %zu/%zu loss %.4g", id.c_str(), s.epoch, cfg.epochs, s.mean_loss);
      info(buf);
    };
    const ModelWeights w = id == "adv" ? adversarial_train(init, train_set, cfg, config_.model.mix)
                                       : advrand::train(init, train_set, cfg);
    write_with_key(ws_.model(id), encode_weights(w), key);
    info("train " + id + ": done (" + fmt_seconds(seconds_since(start)) + ")");
  }
}

std::vector<std::string> Pipeline::model_ids() const {
  std::vector<std::string> ids{"plain"};
  if (config_.model.adversarial) ids.push_back("adv");
  return ids;
}

ModelWeights Pipeline::load_model(const std::string& id) const {
  const auto ids = model_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw ContractError("no model '" + id + "' in this config");
  if (!key_matches(ws_.model(id), model_key())) {
    throw PathError("model '" + id + "' at " + ws_.model(id).string() + " is missing or stale; run train first");
  }
  return load_weights(ws_.model(id));
}

LabeledDataset Pipeline::load_test() const { return load_raster(ws_.test_data()); }

LabeledDataset Pipeline::evaluation_subset() const {
  if (subset_) return *subset_;
  std::vector<ModelWeights> models;
  for (const std::string& id : model_ids()) models.push_back(load_model(id));
  std::vector<const ModelWeights*> ptrs;
  for (const ModelWeights& m : models) ptrs.push_back(&m);
  subset_ = select_correct_subset(ptrs, load_test(), config_.evaluate.n_images, config_.evaluate.subset_seed);
  return *subset_;
}

ScenarioSpec Pipeline::scenario(ScenarioKind kind) const {
  const RandomizationParams& p = config_.defense.params;
  const std::size_t runs = config_.evaluate.defense_runs;
  switch (kind) {
    case ScenarioKind::Vanilla: return ScenarioSpec::vanilla(runs);
    case ScenarioKind::SinglePattern: return ScenarioSpec::single_pattern(centered_pattern(p), runs);
    case ScenarioKind::EnsemblePattern: return ScenarioSpec::ensemble_pattern(default_ensemble_patterns(p), runs);
    case ScenarioKind::OnePixelPad:
    case ScenarioKind::OnePixelResize: {
      ScenarioSpec s;
      s.kind = kind;
      s.defense_runs = 1;
      return s;
    }
  }
  throw ContractError("unknown scenario kind");
}

LabeledDataset Pipeline::scenario_data(ScenarioKind kind) const {
  const LabeledDataset subset = evaluation_subset();
  switch (kind) {
    case ScenarioKind::EnsemblePattern: return prefix(subset, config_.evaluate.ensemble_images);
    case ScenarioKind::OnePixelPad:
    case ScenarioKind::OnePixelResize:
      return resize_dataset(prefix(subset, config_.diagnose.n_images), config_.defense.params.pad_target - 1);
    default: return subset;
  }
}

std::pair<std::vector<AttackResult>, fs::path> Pipeline::attack(const std::string& model_id, ScenarioKind kind,
                                                               const std::string& attack_name) {
  const NamedAttack& named = config_.attack(attack_name);
  const ModelWeights w = load_model(model_id);
  const LabeledDataset data = scenario_data(kind);
  const ScenarioSpec spec = scenario(kind);
  const bool diagnostic = kind == ScenarioKind::OnePixelPad || kind == ScenarioKind::OnePixelResize;
  const RandomizationParams params =
      diagnostic ? diagnostic_defense(kind, config_.defense.params.pad_target).params : config_.defense.params;

  const std::string data_bytes = encode_raster(data, true);
  const std::string key = content_hash(content_hash(encode_weights(w)) + "\n" + named.config.canonical() + "\n" +
                                       describe(spec, params) + "\n" + content_hash(data_bytes));
  const fs::path raster = ws_.cache_dir() / (model_id + "-" + spec.id() + "-" + named.name + "-" + key + ".rast");
  fs::path meta_path = raster;
  meta_path.replace_extension(".json");

  if (fs::exists(raster) && fs::exists(meta_path)) {
    const LabeledDataset cached = load_raster(raster);
    json meta;
    try {
      meta = json::parse(read_file(meta_path));
    } catch (const json::exception& e) {
      throw FormatError(meta_path.string() + ": " + e.what());
    }
    const json& outcomes = meta.at("results");
    if (cached.size() != data.size() || outcomes.size() != data.size()) {
      throw FormatError(raster.string() + ": cache holds " + std::to_string(cached.size()) + " images, expected " +
                        std::to_string(data.size()));
    }
    std::vector<AttackResult> out;
    for (std::size_t i = 0; i < data.size(); ++i) out.push_back(rebuild(data.images[i], cached.images[i], outcomes[i]));
    info("attack " + model_id + "/" + spec.id() + "/" + named.name + ": cached");
    return {std::move(out), raster};
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<AttackResult> results = generate_adversarials(w, spec, named.config, data, params, config_.workers);
  LabeledDataset adv;
  json outcomes = json::array();
  std::size_t successes = 0;
  for (const AttackResult& r : results) {
    adv.images.push_back(quantize_f32(r.adversarial));
    outcomes.push_back({{"success", r.success}, {"iterations", r.iterations_used}, {"error", r.error}});
    successes += r.success;
  }
  adv.labels = data.labels;
  const json meta{{"model", model_id},
                  {"scenario", describe(spec, params)},
                  {"attack", named.name},
                  {"attack_config", named.config.canonical()},
                  {"config", config_.resolved()},
                  {"results", outcomes}};
  write_file(raster, encode_raster(adv, true));
  write_file(meta_path, meta.dump(1) + "\n");
  info("attack " + model_id + "/" + spec.id() + "/" + named.name + ": " + std::to_string(successes) + "/" +
       std::to_string(results.size()) + " fooled the target (" + fmt_seconds(seconds_since(start)) + ")");

  // Hand back exactly what a cache read would give.
  std::vector<AttackResult> out;
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(rebuild(data.images[i], adv.images[i], outcomes[i]));
  return {std::move(out), raster};
}

std::string Pipeline::challenge_model() const {
  return config_.challenge.model == "adv" && config_.model.adversarial ? "adv" : "plain";
}

ScoreFilter Pipeline::challenge_filter() const { return {challenge_model(), "vanilla/challenge"}; }

std::vector<ScenarioReport> Pipeline::evaluate() {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig& c = config_;
  const std::size_t runs = c.evaluate.defense_runs;
  std::vector<ScenarioReport> reports;
  auto add = [&](ScenarioReport r) {
    info("evaluate " + r.model_id + "/" + r.scenario_id + "/" + r.attack_id + ": target " +
         format_percent(r.target_accuracy) + "% defense " + format_percent(r.defense_accuracy_mean) + "%");
    reports.push_back(std::move(r));
  };

  for (const std::string& id : model_ids()) {
    const ModelWeights w = load_model(id);
    const RunOptions opt = options(id);
    add(defend_clean(w, scenario_data(ScenarioKind::Vanilla), c.defense, runs, opt, "vanilla"));
    for (ScenarioKind kind : c.evaluate.scenarios) {
      if (kind == ScenarioKind::OnePixelPad || kind == ScenarioKind::OnePixelResize) continue;
      // The adversarially trained model only appears in the vanilla grid.
      if (id != "plain" && kind != ScenarioKind::Vanilla) continue;
      const LabeledDataset data = scenario_data(kind);
      const ScenarioSpec spec = scenario(kind);
      for (const NamedAttack& a : c.attacks) {
        auto [advs, path] = attack(id, kind, a.name);
        add(defend(w, spec, data, advs, c.defense, opt, a.name, spec.id()));
      }
    }
  }

  if (c.evaluate.variants) {
    const ModelWeights w = load_model("plain");
    const RunOptions opt = options("plain");
    const LabeledDataset data = scenario_data(ScenarioKind::Vanilla);
    const auto advs = attack("plain", ScenarioKind::Vanilla, c.evaluate.variant_attack).first;
    const ScenarioSpec spec = scenario(ScenarioKind::Vanilla);
    const RandomizationParams& p = c.defense.params;
    const std::vector<std::pair<std::string, ColorJitter>> jitters{{"brightness", ColorJitter::brightness()},
                                                                   {"saturation", ColorJitter::saturation_only()},
                                                                   {"hue", ColorJitter::hue()},
                                                                   {"contrast", ColorJitter::contrast_only()}};
    std::vector<std::pair<std::string, DefenseConfig>> variants;
    for (const auto& [name, jitter] : jitters) {
      DefenseConfig d{RandomizationParams::identity(p.base_side), c.defense.n_iterations};
      d.params.jitter = jitter;
      variants.emplace_back("vanilla/" + name, d);
    }
    // "x++": jitter x on top of resize+pad; "all++" stacks every jitter.
    for (const auto& [name, jitter] : jitters) {
      DefenseConfig d = c.defense;
      d.params.jitter = jitter;
      variants.emplace_back("vanilla/" + name + "++", d);
    }
    DefenseConfig all = c.defense;
    all.params.jitter = ColorJitter::all();
    variants.emplace_back("vanilla/all++", all);
    variants.emplace_back("vanilla/downscale", c.downscale_defense());
    for (const auto& [sid, d] : variants) {
      add(defend_clean(w, data, d, runs, opt, sid));
      add(defend(w, spec, data, advs, d, opt, c.evaluate.variant_attack, sid));
    }
  }

  if (c.challenge.enabled) {
    const std::string id = challenge_model();
    const ModelWeights w = load_model(id);
    const RunOptions opt = options(id);
    const LabeledDataset data = scenario_data(ScenarioKind::Vanilla);
    const DefenseConfig d = c.challenge_defense();
    const ScenarioSpec spec = ScenarioSpec::vanilla(1);
    add(defend_clean(w, data, d, 1, opt, "vanilla/challenge"));
    for (const NamedAttack& a : c.attacks) {
      const auto advs = attack(id, ScenarioKind::Vanilla, a.name).first;
      add(defend(w, spec, data, advs, d, opt, a.name, "vanilla/challenge"));
    }
  }

  write_file(ws_.results("evaluate"), reports_json(reports, c.resolved()));
  info("evaluate: " + std::to_string(reports.size()) + " rows (" + fmt_seconds(seconds_since(start)) + ")");
  return reports;
}

std::vector<ScenarioReport> Pipeline::diagnose() {
  const auto start = std::chrono::steady_clock::now();
  const ModelWeights w = load_model("plain");
  const RunOptions opt = options("plain");
  const std::size_t T = config_.defense.params.pad_target;
  std::vector<ScenarioReport> reports;
  for (ScenarioKind kind : {ScenarioKind::OnePixelPad, ScenarioKind::OnePixelResize}) {
    const LabeledDataset data = scenario_data(kind);
    const ScenarioSpec spec = scenario(kind);
    for (const std::string& name : config_.diagnose.attacks) {
      auto [advs, path] = attack("plain", kind, name);
      ScenarioReport r = defend(w, spec, data, advs, diagnostic_defense(kind, T), opt, name, spec.id());
      info("diagnose " + r.scenario_id + "/" + name + ": target " + format_percent(r.target_accuracy) + "% defense " +
           format_percent(r.defense_accuracy_mean) + "%");
      reports.push_back(std::move(r));
    }
  }
  write_file(ws_.results("diagnose"), reports_json(reports, config_.resolved()));
  info("diagnose: done (" + fmt_seconds(seconds_since(start)) + ")");
  return reports;
}

std::vector<SweepCurve> Pipeline::sweep() {
  const auto start = std::chrono::steady_clock::now();
  const ModelWeights w = load_model("plain");
  const RunOptions opt = options("plain");
  const std::size_t n = config_.sweep.n_images;
  const RandomizationParams& p = config_.defense.params;
  std::vector<SweepCurve> curves;

  const LabeledDataset clean = prefix(scenario_data(ScenarioKind::Vanilla), n);
  curves.push_back({"plain", "clean", "clean", clean.size(),
                    iteration_sweep(w, clean.images, clean.labels, p, config_.sweep.counts, opt)});
  for (ScenarioKind kind : config_.evaluate.scenarios) {
    if (kind == ScenarioKind::OnePixelPad || kind == ScenarioKind::OnePixelResize) continue;
    const std::vector<AttackResult> advs = attack("plain", kind, config_.sweep.attack).first;
    const LabeledDataset data = prefix(scenario_data(kind), n);
    const std::vector<AttackResult> head(advs.begin(), advs.begin() + static_cast<std::ptrdiff_t>(data.size()));
    curves.push_back({"plain", to_string(kind), config_.sweep.attack, data.size(),
                      iteration_sweep(w, evaluation_images(head), data.labels, p, config_.sweep.counts, opt)});
  }
  for (const SweepCurve& cv : curves) {
    std::string line = "sweep " + cv.scenario + ":";
    for (const auto& [k, acc] : cv.points) line += " " + std::to_string(k) + "->" + format_percent(acc) + "%";
    info(line);
  }
  write_file(ws_.results("sweep"), sweep_json(curves, config_.resolved()));
  info("sweep: done (" + fmt_seconds(seconds_since(start)) + ")");
  return curves;
}

std::vector<fs::path> Pipeline::report() const {
  const std::string echo = config_.resolved();
  std::vector<fs::path> written;
  auto emit = [&](const fs::path& path, const std::string& text) {
    write_file(path, text);
    written.push_back(path);
  };

  std::vector<ScenarioReport> all;
  bool any = false;
  for (const char* stage : {"evaluate", "diagnose"}) {
    if (!fs::exists(ws_.results(stage))) continue;
    any = true;
    const std::string text = read_file(ws_.results(stage));
    if (embedded_config(text) != echo) {
      throw ContractError(ws_.results(stage).string() + " was produced by a different configuration");
    }
    for (ScenarioReport& r : parse_reports_json(text)) all.push_back(std::move(r));
  }

  if (any) {
    // One table per scenario row label, in first-appearance order; clean rows
    // of the plain scenarios are collected into their own table.
    std::vector<std::string> order;
    std::map<std::string, std::vector<ScenarioReport>> tables;
    for (const ScenarioReport& r : all) {
      const std::string name = r.attack_id == "clean" && r.scenario_id == "vanilla" ? "clean" : file_stem(r.scenario_id);
      if (!tables.count(name)) order.push_back(name);
      tables[name].push_back(r);
    }
    for (const std::string& name : order) {
      emit(ws_.report_dir() / ("table_" + name + ".csv"), reports_csv(tables[name], echo));
      emit(ws_.report_dir() / ("table_" + name + ".json"), reports_json(tables[name], echo));
    }
    emit(ws_.report_dir() / "all.csv", reports_csv(all, echo));
  }

  if (fs::exists(ws_.results("sweep"))) {
    const std::string text = read_file(ws_.results("sweep"));
    if (embedded_config(text) != echo) {
      throw ContractError(ws_.results("sweep").string() + " was produced by a different configuration");
    }
    for (const SweepCurve& cv : parse_sweep_json(text)) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& [k, acc] : cv.points) pts.emplace_back(static_cast<double>(k), acc);
      const std::string title = "defense accuracy vs iterations, model " + cv.model + ", " + cv.scenario +
                                (cv.attack == "clean" ? "" : " " + cv.attack) + ", " + std::to_string(cv.n_images) +
                                " images";
      emit(ws_.report_dir() / ("sweep_" + cv.scenario + ".dat"), plot_data(pts, title, echo));
    }
  }

  if (written.empty()) throw PathError("no results under " + (ws_.root() / "results").string() + "; run evaluate");
  return written;
}

double score_reports(const std::vector<ScenarioReport>& reports, const ScoreFilter& filter) {
  std::vector<CorrectnessMatrix> matrices;
  for (const ScenarioReport& r : reports) {
    if (r.attack_id == "clean") continue;
    if (!filter.model.empty() && r.model_id != filter.model) continue;
    if (!filter.scenario.empty() && r.scenario_id != filter.scenario) continue;
    matrices.push_back(r.defense_correct);
  }
  if (matrices.empty()) throw ContractError("no attacked rows match the score filter");
  return normalized_score(matrices);
}

std::string sweep_json(const std::vector<SweepCurve>& curves, const std::string& config_echo) {
  json arr = json::array();
  for (const SweepCurve& c : curves) {
    json pts = json::array();
    for (const auto& [k, acc] : c.points) pts.push_back({k, acc});
    arr.push_back(
        {{"model", c.model}, {"scenario", c.scenario}, {"attack", c.attack}, {"n_images", c.n_images}, {"points", pts}});
  }
  return json{{"config", config_echo}, {"curves", arr}}.dump(1) + "\n";
}

std::vector<SweepCurve> parse_sweep_json(std::string_view text) {
  std::vector<SweepCurve> out;
  try {
    const json doc = json::parse(text);
    for (const json& j : doc.at("curves")) {
      SweepCurve c;
      c.model = j.at("model").get<std::string>();
      c.scenario = j.at("scenario").get<std::string>();
      c.attack = j.at("attack").get<std::string>();
      c.n_images = j.at("n_images").get<std::size_t>();
      for (const json& p : j.at("points")) c.points.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<double>());
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed sweep JSON: ") + e.what());
  }
  return out;
}

std::string embedded_config(std::string_view report_text) {
  std::size_t i = 0;
  while (i < report_text.size() && std::isspace(static_cast<unsigned char>(report_text[i]))) ++i;
  if (i < report_text.size() && report_text[i] == '{') {
    try {
      const json doc = json::parse(report_text);
      if (doc.contains("config") && doc["config"].is_string()) return doc["config"].get<std::string>();
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed report JSON: ") + e.what());
    }
    throw FormatError("report JSON has no embedded config");
  }
  std::istringstream in{std::string(report_text)};
  std::string line, out;
  bool started = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') break;
    // Plot files start with a title line that is not part of the config.
    if (!started && line.rfind("# plot: ", 0) == 0) continue;
    started = true;
    out += line.size() > 2 ? line.substr(2) : "";
    out += "\n";
  }
  if (out.empty()) throw FormatError("report has no embedded config");
  return out;
}

}  // namespace advrand
