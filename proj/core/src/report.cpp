#include "advrand/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "advrand/config.hpp"
#include "advrand/errors.hpp"

namespace advrand {

using nlohmann::json;

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
  return buf;
}

std::string comment_block(const std::string& text) {
  std::ostringstream os;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) os << (line.empty() ? "#" : "# " + line) << "\n";
  return os.str();
}

std::string reports_csv(const std::vector<ScenarioReport>& reports, const std::string& config_echo) {
  std::ostringstream os;
  os << comment_block(config_echo) << kCsvHeader << "\n";
  for (const ScenarioReport& r : reports) {
    os << r.model_id << "," << r.attack_id << "," << r.scenario_id << "," << format_percent(r.target_accuracy) << ","
       << format_percent(r.defense_accuracy_mean) << ",";
    for (std::size_t i = 0; i < r.defense_accuracy_runs.size(); ++i)
      os << (i ? ";" : "") << format_percent(r.defense_accuracy_runs[i]);
    os << "," << r.n_images << "\n";
  }
  return os.str();
}

std::vector<ScenarioReport> parse_reports_csv(std::string_view text) {
  std::vector<ScenarioReport> out;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw ParseError("unexpected CSV header", line_no);
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 7) throw ParseError("expected 7 columns", line_no);
    ScenarioReport r;
    r.model_id = cols[0];
    r.attack_id = cols[1];
    r.scenario_id = cols[2];
    try {
      r.target_accuracy = parse_number(cols[3]) / 100.0;
      r.defense_accuracy_mean = parse_number(cols[4]) / 100.0;
      std::stringstream runs(cols[5]);
      std::string run;
      while (std::getline(runs, run, ';')) r.defense_accuracy_runs.push_back(parse_number(run) / 100.0);
      r.n_images = static_cast<std::size_t>(std::llround(parse_number(cols[6])));
    } catch (const ContractError& e) {
      throw ParseError(e.what(), line_no);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string reports_json(const std::vector<ScenarioReport>& reports, const std::string& config_echo,
                         const std::string& extra) {
  json rows = json::array();
  for (const ScenarioReport& r : reports) {
    json correct = json::array();
    for (const std::vector<bool>& run : r.defense_correct) {
      std::string bits;
      for (bool b : run) bits.push_back(b ? '1' : '0');
      correct.push_back(bits);
    }
    rows.push_back({{"model", r.model_id},
                    {"attack", r.attack_id},
                    {"scenario", r.scenario_id},
                    {"target_accuracy", r.target_accuracy},
                    {"defense_accuracy_mean", r.defense_accuracy_mean},
                    {"defense_accuracy_runs", r.defense_accuracy_runs},
                    {"n_images", r.n_images},
                    {"attack_failures", r.attack_failures},
                    {"defense_correct", correct}});
  }
  json doc{{"config", config_echo}, {"reports", rows}};
  if (!extra.empty()) {
    json more = json::parse(extra);
    if (!more.is_object()) throw ContractError("extra report fields must form a JSON object");
    for (auto& [k, v] : more.items()) doc[k] = v;
  }
  return doc.dump(1) + "\n";
}

std::vector<ScenarioReport> parse_reports_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("reports") || !doc["reports"].is_array()) {
    throw FormatError("report JSON lacks a 'reports' array");
  }
  std::vector<ScenarioReport> out;
  try {
    for (const json& j : doc["reports"]) {
      ScenarioReport r;
      r.model_id = j.at("model").get<std::string>();
      r.attack_id = j.at("attack").get<std::string>();
      r.scenario_id = j.at("scenario").get<std::string>();
      r.target_accuracy = j.at("target_accuracy").get<double>();
      r.defense_accuracy_mean = j.at("defense_accuracy_mean").get<double>();
      r.defense_accuracy_runs = j.at("defense_accuracy_runs").get<std::vector<double>>();
      r.n_images = j.at("n_images").get<std::size_t>();
      r.attack_failures = j.value("attack_failures", std::size_t{0});
      for (const json& bits : j.value("defense_correct", json::array())) {
        std::vector<bool> run;
        for (char ch : bits.get<std::string>()) run.push_back(ch == '1');
        r.defense_correct.push_back(std::move(run));
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report entry: ") + e.what());
  }
  return out;
}

std::string plot_data(const std::vector<std::pair<double, double>>& points, const std::string& title,
                      const std::string& config_echo) {
  std::ostringstream os;
  os << "# plot: " << title << "\n" << comment_block(config_echo);
  char buf[96];
  for (const auto& [x, y] : points) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", x, y);
    os << buf;
  }
  return os.str();
}

}  // namespace advrand
