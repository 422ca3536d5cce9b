// advrand command-line driver.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data or file
// format error, 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advrand/config.hpp"
#include "advrand/errors.hpp"
#include "advrand/io.hpp"
#include "advrand/pipeline.hpp"
#include "advrand/report.hpp"

namespace fs = std::filesystem;
using namespace advrand;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  std::size_t workers = 0;  // 0 keeps the config value
  std::string output;
  bool quiet = false;
};

ExperimentConfig load(const Common& c) {
  std::vector<std::string> overrides = c.overrides;
  if (!c.seed.empty()) overrides.push_back("master_seed=" + c.seed);
  std::string text;
  if (!c.config_path.empty()) {
    text = read_file(c.config_path);
    const std::string ext = fs::path(c.config_path).extension().string();
    // A report file carries the configuration that produced it.
    if (ext == ".csv" || ext == ".json" || ext == ".dat") text = embedded_config(text);
  }
  ExperimentConfig cfg = parse_config(text, overrides);
  if (c.workers) cfg.workers = c.workers;
  if (!c.output.empty()) cfg.output = c.output;
  return cfg;
}

Logger logger(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& m) { std::cerr << m << std::endl; };
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "Config file, or a report file whose embedded config is reused");
  app->add_option("-s,--set", c.overrides, "Override, e.g. evaluate.n_images=100 or attack.cw.c=3")->take_all();
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("-w,--workers", c.workers, "Worker threads (0 = all cores)");
  app->add_option("-o,--output", c.output, "Workspace directory");
  app->add_flag("-q,--quiet", c.quiet, "No progress output");
}

void print_score(double s) { std::printf("%.6f\n", s); }

std::vector<ScenarioReport> read_reports(const std::vector<std::string>& files) {
  std::vector<ScenarioReport> all;
  for (const std::string& f : files) {
    const std::string text = read_file(f);
    const std::vector<ScenarioReport> rows =
        fs::path(f).extension() == ".csv" ? parse_reports_csv(text) : parse_reports_json(text);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized resize and pad defense: data, training, attacks, evaluation and reports"};
  app.require_subcommand(1);
  Common common;

  bool force = false;
  auto* gen = app.add_subcommand("gen-data", "Write the dataset into the workspace");
  gen->add_flag("-f,--force", force, "Regenerate even if up to date");
  auto* trn = app.add_subcommand("train", "Train the plain and adversarially trained models");
  trn->add_flag("-f,--force", force, "Retrain even if up to date");

  std::string model = "plain", scenario = "vanilla", attack_name;
  auto* atk = app.add_subcommand("attack", "Materialize adversarial examples into the cache");
  atk->add_option("-m,--model", model, "plain or adv");
  atk->add_option("--scenario", scenario, "vanilla, single, ensemble, pad1 or resize1");
  atk->add_option("-a,--attack", attack_name, "Attack name from the config")->required();

  bool no_sweep = false;
  auto* ev = app.add_subcommand("evaluate", "Run the scenario grid, defense variants and iteration sweep");
  ev->add_flag("--no-sweep", no_sweep, "Skip the iteration sweep");
  auto* dia = app.add_subcommand("diagnose", "Run the one-pixel pad and resize diagnostics");

  std::vector<std::string> score_files;
  std::string score_model, score_scenario;
  bool score_all = false;
  auto* sc = app.add_subcommand("score", "Normalized score over attacked rows of result files");
  sc->add_option("-r,--results", score_files, "Report files (.json or .csv); default: the workspace evaluate results");
  sc->add_option("--model", score_model, "Only rows of this model");
  sc->add_option("--scenario", score_scenario, "Only rows of this scenario");
  sc->add_flag("--all", score_all, "Every attacked row instead of the challenge rows");

  auto* rep = app.add_subcommand("report", "Render CSV/JSON tables and plot data from results");
  auto* repro = app.add_subcommand("repro", "gen-data, train, evaluate, diagnose, report and score in one go");
  auto* show = app.add_subcommand("config", "Print the fully resolved configuration");

  for (CLI::App* sub : {gen, trn, atk, ev, dia, sc, rep, repro, show}) add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    if (*show) {
      std::cout << load(common).resolved();
      return kOk;
    }
    Pipeline p(load(common), logger(common));
    if (*gen) p.gen_data(force);
    if (*trn) p.train(force);
    if (*atk) {
      auto [results, path] = p.attack(model, parse_scenario_kind(scenario), attack_name);
      std::size_t fooled = 0;
      for (const AttackResult& r : results) fooled += r.success;
      std::printf("%s\n%zu of %zu fooled the target\n", path.string().c_str(), fooled, results.size());
    }
    if (*ev) {
      p.evaluate();
      if (!no_sweep) p.sweep();
    }
    if (*dia) p.diagnose();
    if (*rep) {
      for (const fs::path& f : p.report()) std::printf("%s\n", f.string().c_str());
    }
    if (*sc) {
      if (score_files.empty()) score_files.push_back(p.workspace().results("evaluate").string());
      ScoreFilter filter{score_model, score_scenario};
      if (!score_all && score_model.empty() && score_scenario.empty() && p.config().challenge.enabled) {
        filter = p.challenge_filter();
      }
      print_score(score_reports(read_reports(score_files), filter));
    }
    if (*repro) {
      p.gen_data();
      p.train();
      const std::vector<ScenarioReport> rows = p.evaluate();
      p.sweep();
      p.diagnose();
      p.report();
      if (p.config().challenge.enabled) {
        std::printf("challenge score: ");
        print_score(score_reports(rows, p.challenge_filter()));
      }
      if (!common.quiet) {
        std::fprintf(stderr, "repro: done in %.0fs, reports under %s\n",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
                     p.workspace().report_dir().string().c_str());
      }
    }
    return kOk;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << (e.key().empty() ? "" : " (key '" + e.key() + "')") << "\n";
    return kUsage;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const PathError& e) {
    std::cerr << "path error: " << e.what() << "\n";
    return kData;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
