#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmchat/analytics.hpp"
#include "swarmchat/orchestrator.hpp"

namespace swarmchat {

/// One line of a scenario script:
///   {"keywords": "patrol area", "selection": 1, "modality": "Teleop",
///    "key": "P", "robot": "TurtleBot 1", "comment": "good"}
/// "selection" is a candidate index (1..4) or a custom command string.
/// Voice steps may carry "transcript" instead of a custom string.
struct ScenarioStep {
  int line = 0;
  std::string keywords;
  std::optional<int> index;
  std::optional<std::string> custom;
  std::optional<std::string> transcript;
  Modality modality = Modality::Text;
  std::optional<char> key;
  std::string robot;
  std::optional<std::string> comment;
};

/// Blank lines and lines starting with '#' are skipped. Throws ScenarioError
/// naming the offending line.
std::vector<ScenarioStep> parse_scenario(std::istream& in);
std::vector<ScenarioStep> load_scenario(const std::filesystem::path& path);

struct ReportRow {
  ModuleId module = ModuleId::TP;
  std::size_t step = 0;  // 1-based
  std::string context;
  double score = 0.0;
  Modality suggested = Modality::Text;
  std::string user;  // "Teleop (P)", "Voice", ...
  SatisfactionLevel satisfaction = SatisfactionLevel::Low;
  std::string decision;
  std::string comment;
};

struct StepResult {
  DispatchResult dispatch;
  std::optional<FeedbackEnvelope> terminal;
};

struct ScenarioReport {
  std::vector<StepResult> steps;
  std::vector<ReportRow> rows;  // grouped by module, then step
  std::optional<std::string> error;  // "step N: <Code>: detail"
};

struct ScenarioOptions {
  ManualClock* clock = nullptr;  // when set, moved to start + step * tick before each step
  std::int64_t start_ms = 1'700'000'000'000;
  std::int64_t tick_ms = 1000;
  std::chrono::milliseconds feedback_timeout{10'000};
};

/// Runs every step in its own session and waits for the terminal feedback
/// before the next one. Stops at the first failing step.
ScenarioReport run_scenario(Orchestrator& orchestrator, const std::vector<ScenarioStep>& steps,
                            const ScenarioOptions& options = {});

/// Rows for the steps run so far, from the orchestrator's analytics.
std::vector<ReportRow> build_report(const AnalyticsSnapshot& snapshot, const TextSimilarity& sim,
                                    std::size_t first_record = 0);

std::string render_table(const std::vector<ReportRow>& rows);
nlohmann::ordered_json render_json(const ScenarioReport& report);

}  // namespace swarmchat
