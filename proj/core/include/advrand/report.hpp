#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "advrand/harness.hpp"

// Report files. Accuracies appear in CSV as percentages with one decimal;
// JSON keeps the raw fractions and the per-image defense outcomes. Every
// file embeds the resolved configuration: CSV and plot files as leading
// "# " comment lines, JSON under "config".
//
// CSV columns, in order:
//   model, attack, scenario, target_acc, defense_acc_mean, defense_acc_runs, n_images
// defense_acc_runs holds the per-run percentages separated by ';'.

namespace advrand {

inline constexpr const char* kCsvHeader = "model,attack,scenario,target_acc,defense_acc_mean,defense_acc_runs,n_images";

/// 0.9741 -> "97.4".
std::string format_percent(double fraction);

std::string reports_csv(const std::vector<ScenarioReport>& reports, const std::string& config_echo);
std::vector<ScenarioReport> parse_reports_csv(std::string_view text);

/// `extra` is merged into the top-level object when it is a JSON object
/// text (e.g. sweep results); pass "" for none.
std::string reports_json(const std::vector<ScenarioReport>& reports, const std::string& config_echo,
                         const std::string& extra = "");
std::vector<ScenarioReport> parse_reports_json(std::string_view text);

/// Two-column "x y" text after a "# plot: <title>" line and the config
/// comment lines.
std::string plot_data(const std::vector<std::pair<double, double>>& points, const std::string& title,
                      const std::string& config_echo);

/// Prefixes each line of `text` with "# ".
std::string comment_block(const std::string& text);

}  // namespace advrand
