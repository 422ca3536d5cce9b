#include "advrand/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "advrand/errors.hpp"
#include "advrand/io.hpp"

namespace advrand {

namespace {

struct Entry {
  std::string section;  // "" for top level
  std::string key;
  std::string value;
  int line = 0;  // 0 for overrides
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

const std::vector<std::string> kSections = {"data", "model", "defense", "evaluate", "diagnose", "sweep", "challenge"};

bool known_section(const std::string& s) {
  if (s.rfind("attack.", 0) == 0) return valid_name(std::string_view(s).substr(7));
  return std::find(kSections.begin(), kSections.end(), s) != kSections.end();
}

std::vector<Entry> tokenize(std::string_view text) {
  std::vector<Entry> out;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::size_t cut = raw.find_first_of("#;");
    const std::string line = trim(raw.substr(0, cut));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_section(section)) throw ParseError("unknown section [" + section + "]", line_no, section);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    Entry e{section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), line_no};
    if (!valid_name(e.key)) throw ParseError("invalid key '" + e.key + "'", line_no, e.key);
    for (const Entry& prev : out) {
      if (prev.section == e.section && prev.key == e.key) {
        throw ParseError("duplicate key (first set on line " + std::to_string(prev.line) + ")", line_no, e.key);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

Entry parse_override(const std::string& text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos) throw ParseError("override '" + text + "' lacks '='", 0, text);
  const std::string path = trim(std::string_view(text).substr(0, eq));
  Entry e;
  e.value = trim(std::string_view(text).substr(eq + 1));
  const std::size_t last = path.rfind('.');
  if (last == std::string::npos) {
    e.key = path;
  } else {
    e.section = path.substr(0, last);
    e.key = path.substr(last + 1);
  }
  if (!valid_name(e.key) || (!e.section.empty() && !known_section(e.section))) {
    throw ParseError("override '" + text + "' names no known key", 0, path);
  }
  return e;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

class Applier {
 public:
  explicit Applier(const Entry& e) : e_(e) {}

  [[noreturn]] void fail(const std::string& what) const {
    const std::string where = e_.section.empty() ? e_.key : e_.section + "." + e_.key;
    throw ParseError(where + ": " + what, e_.line, e_.key);
  }

  double number() const {
    try {
      return parse_number(e_.value);
    } catch (const ContractError& err) {
      fail(err.what());
    }
  }

  std::uint64_t integer() const {
    std::uint64_t v = 0;
    const char* end = e_.value.data() + e_.value.size();
    auto res = std::from_chars(e_.value.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) fail("expected a non-negative integer, got '" + e_.value + "'");
    return v;
  }

  std::size_t size() const { return static_cast<std::size_t>(integer()); }

  bool boolean() const {
    if (e_.value == "true") return true;
    if (e_.value == "false") return false;
    fail("expected true or false, got '" + e_.value + "'");
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const std::string& item : split_list(e_.value)) {
      try {
        out.push_back(parse_number(item));
      } catch (const ContractError& err) {
        fail(err.what());
      }
    }
    return out;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out;
    for (const std::string& item : split_list(e_.value)) {
      std::size_t v = 0;
      auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      if (res.ec != std::errc() || res.ptr != item.data() + item.size()) fail("expected integers, got '" + item + "'");
      out.push_back(v);
    }
    return out;
  }

  bool off() const { return e_.value == "off"; }

  std::pair<double, double> range() const {
    const std::vector<double> v = numbers();
    if (v.size() != 2) fail("expected 'lo, hi'");
    return {v[0], v[1]};
  }

  const std::string& text() const { return e_.value; }
  const std::string& key() const { return e_.key; }

 private:
  const Entry& e_;
};

void apply_top(ExperimentConfig& c, const Applier& a) {
  if (a.key() == "master_seed") c.master_seed = a.integer();
  else if (a.key() == "workers") c.workers = a.size();
  else if (a.key() == "output") c.output = a.text();
  else a.fail("unknown key");
}

void apply_data(ExperimentConfig& c, const Applier& a) {
  SyntheticSpec& s = c.data.synthetic;
  const std::string& k = a.key();
  if (k == "source") c.data.source = a.text();
  else if (k == "side") s.side = a.size();
  else if (k == "channels") s.channels = a.size();
  else if (k == "train_count") s.train_count = a.size();
  else if (k == "test_count") s.test_count = a.size();
  else if (k == "seed") s.seed = a.integer();
  else if (k == "noise") s.noise = a.number();
  else a.fail("unknown key");
}

void apply_model(ExperimentConfig& c, const Applier& a) {
  ModelSection& m = c.model;
  RandomizationParams& aug = m.train.augmentation.params;
  const std::string& k = a.key();
  if (k == "conv1") m.arch.conv1_channels = a.size();
  else if (k == "conv2") m.arch.conv2_channels = a.size();
  else if (k == "kernel") m.arch.kernel = a.size();
  else if (k == "stride1") m.arch.conv1_stride = a.size();
  else if (k == "stride2") m.arch.conv2_stride = a.size();
  else if (k == "num_classes") m.arch.num_classes = a.size();
  else if (k == "init_seed") m.init_seed = a.integer();
  else if (k == "epochs") m.train.epochs = a.size();
  else if (k == "lr") m.train.lr = a.number();
  else if (k == "momentum") m.train.momentum = a.number();
  else if (k == "batch_size") m.train.batch_size = a.size();
  else if (k == "train_seed") m.train.seed = a.integer();
  else if (k == "pattern_prob") m.train.augmentation.pattern_prob = a.number();
  else if (k == "jitter_prob") m.train.augmentation.jitter_prob = a.number();
  else if (k == "aug_resize_min") aug.resize_min = a.size();
  else if (k == "aug_resize_max") aug.resize_max_exclusive = a.size();
  else if (k == "aug_pad_target") aug.pad_target = a.size();
  else if (k == "adversarial") m.adversarial = a.boolean();
  else if (k == "adv_epsilons") m.mix.epsilons = a.numbers();
  else if (k == "mix_fraction") m.mix.mix_fraction = a.number();
  else a.fail("unknown key");
}

void apply_defense(ExperimentConfig& c, const Applier& a) {
  RandomizationParams& p = c.defense.params;
  const std::string& k = a.key();
  if (k == "base_side") p.base_side = a.size();
  else if (k == "resize_min") p.resize_min = a.size();
  else if (k == "resize_max") p.resize_max_exclusive = a.size();
  else if (k == "pad_target") p.pad_target = a.size();
  else if (k == "flip_prob") p.flip_prob = a.number();
  else if (k == "n_iterations") c.defense.n_iterations = a.size();
  else if (k == "brightness") p.jitter.brightness_max = a.off() ? std::nullopt : std::optional(a.number());
  else if (k == "hue") p.jitter.hue_max = a.off() ? std::nullopt : std::optional(a.number());
  else if (k == "saturation") p.jitter.saturation = a.off() ? std::nullopt : std::optional(a.range());
  else if (k == "contrast") p.jitter.contrast = a.off() ? std::nullopt : std::optional(a.range());
  else a.fail("unknown key");
}

void apply_evaluate(ExperimentConfig& c, const Applier& a) {
  EvaluateSection& e = c.evaluate;
  const std::string& k = a.key();
  if (k == "n_images") e.n_images = a.size();
  else if (k == "ensemble_images") e.ensemble_images = a.size();
  else if (k == "subset_seed") e.subset_seed = a.integer();
  else if (k == "defense_runs") e.defense_runs = a.size();
  else if (k == "variants") e.variants = a.boolean();
  else if (k == "variant_attack") e.variant_attack = a.text();
  else if (k == "downscale_min") e.downscale_min = a.size();
  else if (k == "scenarios") {
    e.scenarios.clear();
    for (const std::string& s : split_list(a.text())) {
      try {
        e.scenarios.push_back(parse_scenario_kind(s));
      } catch (const ContractError& err) {
        a.fail(err.what());
      }
    }
  } else a.fail("unknown key");
}

void apply_diagnose(ExperimentConfig& c, const Applier& a) {
  if (a.key() == "n_images") c.diagnose.n_images = a.size();
  else if (a.key() == "attacks") c.diagnose.attacks = split_list(a.text());
  else a.fail("unknown key");
}

void apply_sweep(ExperimentConfig& c, const Applier& a) {
  if (a.key() == "counts") c.sweep.counts = a.sizes();
  else if (a.key() == "attack") c.sweep.attack = a.text();
  else if (a.key() == "n_images") c.sweep.n_images = a.size();
  else a.fail("unknown key");
}

void apply_challenge(ExperimentConfig& c, const Applier& a) {
  ChallengeSection& ch = c.challenge;
  const std::string& k = a.key();
  if (k == "enabled") ch.enabled = a.boolean();
  else if (k == "model") ch.model = a.text();
  else if (k == "resize_min") ch.resize_min = a.size();
  else if (k == "flip_prob") ch.flip_prob = a.number();
  else if (k == "n_iterations") ch.n_iterations = a.size();
  else a.fail("unknown key");
}

AttackConfig build_attack(const std::vector<const Entry*>& entries, const std::string& name) {
  const Entry* kind_entry = nullptr;
  for (const Entry* e : entries)
    if (e->key == "kind") kind_entry = e;
  if (!kind_entry) throw ParseError("[attack." + name + "] needs a 'kind'", entries.front()->line, "kind");
  AttackConfig cfg;
  try {
    switch (parse_attack_kind(kind_entry->value)) {
      case AttackKind::FGSM: cfg = AttackConfig::fgsm(2.0 / 255.0); break;
      case AttackKind::DeepFool: cfg = AttackConfig::deepfool(); break;
      case AttackKind::CW: cfg = AttackConfig::cw(); break;
    }
  } catch (const ContractError& err) {
    throw ParseError(err.what(), kind_entry->line, "kind");
  }
  for (const Entry* e : entries) {
    Applier a(*e);
    const std::string& k = e->key;
    if (k == "kind") continue;
    if (k == "epsilon") cfg.epsilon = a.number();
    else if (k == "max_iter") cfg.max_iter = a.size();
    else if (k == "overshoot") cfg.overshoot = a.number();
    else if (k == "c") cfg.c = a.number();
    else if (k == "k") cfg.k = a.number();
    else if (k == "lr") cfg.lr = a.number();
    else if (k == "seed") cfg.seed = a.integer();
    else a.fail("unknown key");
  }
  return cfg;
}

std::string attack_block(const NamedAttack& a) {
  const AttackConfig& c = a.config;
  std::ostringstream os;
  os << "[attack." << a.name << "]\n"
     << "kind = " << to_string(c.kind) << "\n"
     << "epsilon = " << fmt(c.epsilon) << "\n"
     << "max_iter = " << c.max_iter << "\n"
     << "overshoot = " << fmt(c.overshoot) << "\n"
     << "c = " << fmt(c.c) << "\n"
     << "k = " << fmt(c.k) << "\n"
     << "lr = " << fmt(c.lr) << "\n"
     << "seed = " << c.seed << "\n";
  return os.str();
}

}  // namespace

double parse_number(std::string_view text) {
  const std::string s = trim(text);
  auto one = [](std::string_view part) {
    const std::string p = trim(part);
    double v = 0.0;
    auto res = std::from_chars(p.data(), p.data() + p.size(), v);
    if (p.empty() || res.ec != std::errc() || res.ptr != p.data() + p.size()) {
      throw ContractError("expected a number, got '" + p + "'");
    }
    return v;
  };
  const std::size_t slash = s.find('/');
  if (slash == std::string::npos) return one(s);
  const double den = one(std::string_view(s).substr(slash + 1));
  if (den == 0.0) throw ContractError("zero denominator in '" + s + "'");
  return one(std::string_view(s).substr(0, slash)) / den;
}

TrainConfig ModelSection::default_train() {
  TrainConfig t;
  t.epochs = 15;
  t.augmentation.pattern_prob = 0.5;
  t.augmentation.jitter_prob = 0.5;
  t.augmentation.params.jitter = ColorJitter::all();
  return t;
}

std::vector<NamedAttack> ExperimentConfig::default_attacks() {
  return {{"fgsm2", AttackConfig::fgsm(2.0 / 255.0)},
          {"fgsm5", AttackConfig::fgsm(5.0 / 255.0)},
          {"fgsm10", AttackConfig::fgsm(10.0 / 255.0)},
          {"deepfool", AttackConfig::deepfool(50, 0.02)},
          {"cw", AttackConfig::cw(3.0, 0.0, 200, 0.03)}};
}

DefenseConfig ExperimentConfig::downscale_defense() const {
  DefenseConfig d = defense;
  d.params.resize_min = evaluate.downscale_min;
  d.params.resize_max_exclusive = d.params.base_side;
  d.params.pad_target = d.params.base_side;
  return d;
}

DefenseConfig ExperimentConfig::challenge_defense() const {
  DefenseConfig d = defense;
  d.params.resize_min = challenge.resize_min;
  d.params.flip_prob = challenge.flip_prob;
  d.n_iterations = challenge.n_iterations;
  return d;
}

const NamedAttack& ExperimentConfig::attack(const std::string& name) const {
  for (const NamedAttack& a : attacks)
    if (a.name == name) return a;
  throw ContractError("no attack named '" + name + "'");
}

void ExperimentConfig::validate() const {
  model.arch.validate();
  defense.validate();
  if (model.arch.input_side != data.synthetic.side || model.arch.channels != data.synthetic.channels) {
    throw ContractError("model input must match the data side and channels");
  }
  if (model.train.augmentation.pattern_prob > 0.0 || model.train.augmentation.jitter_prob > 0.0) {
    model.train.augmentation.params.validate();
  }
  if (attacks.empty()) throw ContractError("at least one attack is required");
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    attacks[i].config.validate();
    for (std::size_t j = 0; j < i; ++j)
      if (attacks[j].name == attacks[i].name) throw ContractError("duplicate attack name '" + attacks[i].name + "'");
  }
  for (const std::string& name : diagnose.attacks) attack(name);
  attack(sweep.attack);
  if (evaluate.defense_runs == 0) throw ContractError("evaluate.defense_runs must be at least 1");
  for (std::size_t n : sweep.counts)
    if (n == 0) throw ContractError("sweep counts must be positive");
  if (evaluate.variants) {
    attack(evaluate.variant_attack);
    downscale_defense().validate();
  }
  if (challenge.enabled) {
    if (challenge.model != "adv" && challenge.model != "plain") {
      throw ContractError("challenge.model must be adv or plain");
    }
    challenge_defense().validate();
  }
}

std::string ExperimentConfig::resolved() const {
  const SyntheticSpec& s = data.synthetic;
  const RandomizationParams& p = defense.params;
  const RandomizationParams& aug = model.train.augmentation.params;
  std::vector<std::string> scenario_names;
  for (ScenarioKind k : evaluate.scenarios) scenario_names.push_back(to_string(k));
  std::ostringstream os;
  os << "master_seed = " << master_seed << "\n\n"
     << "[data]\n"
     << "source = " << data.source << "\n"
     << "side = " << s.side << "\n"
     << "channels = " << s.channels << "\n"
     << "train_count = " << s.train_count << "\n"
     << "test_count = " << s.test_count << "\n"
     << "seed = " << s.seed << "\n"
     << "noise = " << fmt(s.noise) << "\n\n"
     << "[model]\n"
     << "conv1 = " << model.arch.conv1_channels << "\n"
     << "conv2 = " << model.arch.conv2_channels << "\n"
     << "kernel = " << model.arch.kernel << "\n"
     << "stride1 = " << model.arch.conv1_stride << "\n"
     << "stride2 = " << model.arch.conv2_stride << "\n"
     << "num_classes = " << model.arch.num_classes << "\n"
     << "init_seed = " << model.init_seed << "\n"
     << "epochs = " << model.train.epochs << "\n"
     << "lr = " << fmt(model.train.lr) << "\n"
     << "momentum = " << fmt(model.train.momentum) << "\n"
     << "batch_size = " << model.train.batch_size << "\n"
     << "train_seed = " << model.train.seed << "\n"
     << "pattern_prob = " << fmt(model.train.augmentation.pattern_prob) << "\n"
     << "jitter_prob = " << fmt(model.train.augmentation.jitter_prob) << "\n"
     << "aug_resize_min = " << aug.resize_min << "\n"
     << "aug_resize_max = " << aug.resize_max_exclusive << "\n"
     << "aug_pad_target = " << aug.pad_target << "\n"
     << "adversarial = " << (model.adversarial ? "true" : "false") << "\n"
     << "adv_epsilons = " << fmt_list(model.mix.epsilons) << "\n"
     << "mix_fraction = " << fmt(model.mix.mix_fraction) << "\n\n"
     << "[defense]\n"
     << "base_side = " << p.base_side << "\n"
     << "resize_min = " << p.resize_min << "\n"
     << "resize_max = " << p.resize_max_exclusive << "\n"
     << "pad_target = " << p.pad_target << "\n"
     << "flip_prob = " << fmt(p.flip_prob) << "\n"
     << "n_iterations = " << defense.n_iterations << "\n"
     << "brightness = " << (p.jitter.brightness_max ? fmt(*p.jitter.brightness_max) : "off") << "\n"
     << "saturation = "
     << (p.jitter.saturation ? fmt(p.jitter.saturation->first) + ", " + fmt(p.jitter.saturation->second) : "off")
     << "\n"
     << "hue = " << (p.jitter.hue_max ? fmt(*p.jitter.hue_max) : "off") << "\n"
     << "contrast = "
     << (p.jitter.contrast ? fmt(p.jitter.contrast->first) + ", " + fmt(p.jitter.contrast->second) : "off") << "\n\n"
     << "[evaluate]\n"
     << "n_images = " << evaluate.n_images << "\n"
     << "ensemble_images = " << evaluate.ensemble_images << "\n"
     << "subset_seed = " << evaluate.subset_seed << "\n"
     << "scenarios = " << join(scenario_names) << "\n"
     << "defense_runs = " << evaluate.defense_runs << "\n"
     << "variants = " << (evaluate.variants ? "true" : "false") << "\n"
     << "variant_attack = " << evaluate.variant_attack << "\n"
     << "downscale_min = " << evaluate.downscale_min << "\n\n"
     << "[diagnose]\n"
     << "n_images = " << diagnose.n_images << "\n"
     << "attacks = " << join(diagnose.attacks) << "\n\n"
     << "[sweep]\n"
     << "counts = " << join(sweep.counts) << "\n"
     << "attack = " << sweep.attack << "\n"
     << "n_images = " << sweep.n_images << "\n\n"
     << "[challenge]\n"
     << "enabled = " << (challenge.enabled ? "true" : "false") << "\n"
     << "model = " << challenge.model << "\n"
     << "resize_min = " << challenge.resize_min << "\n"
     << "flip_prob = " << fmt(challenge.flip_prob) << "\n"
     << "n_iterations = " << challenge.n_iterations << "\n";
  for (const NamedAttack& a : attacks) os << "\n" << attack_block(a);
  return os.str();
}

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  std::vector<Entry> entries = tokenize(text);
  const bool has_attacks = std::any_of(entries.begin(), entries.end(),
                                       [](const Entry& e) { return e.section.rfind("attack.", 0) == 0; });
  if (!has_attacks) {
    std::string defaults;
    for (const NamedAttack& a : ExperimentConfig::default_attacks()) defaults += attack_block(a);
    for (Entry& e : tokenize(defaults)) {
      e.line = 0;
      entries.push_back(std::move(e));
    }
  }
  for (const std::string& o : overrides) {
    Entry e = parse_override(o);
    auto same = std::find_if(entries.begin(), entries.end(),
                             [&](const Entry& x) { return x.section == e.section && x.key == e.key; });
    if (same != entries.end()) {
      same->value = e.value;
      same->line = 0;
    } else {
      entries.push_back(std::move(e));
    }
  }

  ExperimentConfig cfg;

  std::vector<std::string> attack_order;
  std::map<std::string, std::vector<const Entry*>> attack_entries;
  for (const Entry& e : entries) {
    Applier a(e);
    if (e.section.empty()) apply_top(cfg, a);
    else if (e.section == "data") apply_data(cfg, a);
    else if (e.section == "model") apply_model(cfg, a);
    else if (e.section == "defense") apply_defense(cfg, a);
    else if (e.section == "evaluate") apply_evaluate(cfg, a);
    else if (e.section == "diagnose") apply_diagnose(cfg, a);
    else if (e.section == "sweep") apply_sweep(cfg, a);
    else if (e.section == "challenge") apply_challenge(cfg, a);
    else {
      const std::string name = e.section.substr(7);
      if (!attack_entries.count(name)) attack_order.push_back(name);
      attack_entries[name].push_back(&e);
    }
  }
  cfg.attacks.clear();
  for (const std::string& name : attack_order) cfg.attacks.push_back({name, build_attack(attack_entries[name], name)});

  cfg.model.arch.input_side = cfg.data.synthetic.side;
  cfg.model.arch.channels = cfg.data.synthetic.channels;
  try {
    cfg.validate();
  } catch (const ContractError& err) {
    throw ParseError(std::string("invalid configuration: ") + err.what(), 0);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  return parse_config(read_file(path), overrides);
}

}  // namespace advrand
