#include "swarmchat/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>

namespace swarmchat {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad_line(int line, const std::string& why) {
  throw Error(ErrorCode::ScenarioError, fmt::format("line {}: {}", line, why));
}

std::string string_field(const json& j, const char* key, int line, bool required) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) bad_line(line, fmt::format("missing \"{}\"", key));
    return {};
  }
  if (!it->is_string()) bad_line(line, fmt::format("\"{}\" must be a string", key));
  return it->get<std::string>();
}

ScenarioStep parse_step(const std::string& text, int line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad_line(line, e.what());
  }
  if (!j.is_object()) bad_line(line, "expected a JSON object");

  ScenarioStep step;
  step.line = line;
  step.keywords = string_field(j, "keywords", line, true);
  step.robot = string_field(j, "robot", line, true);
  try {
    step.modality = parse_modality(string_field(j, "modality", line, true));
  } catch (const Error& e) {
    bad_line(line, e.what());
  }

  if (auto it = j.find("selection"); it != j.end() && !it->is_null()) {
    if (it->is_number_integer())
      step.index = it->get<int>();
    else if (it->is_string())
      step.custom = it->get<std::string>();
    else
      bad_line(line, "\"selection\" must be an index or a command string");
  }
  if (auto t = string_field(j, "transcript", line, false); !t.empty()) step.transcript = t;
  if (!step.index && !step.custom && !step.transcript) bad_line(line, "missing \"selection\"");

  if (auto k = string_field(j, "key", line, false); !k.empty()) {
    if (k.size() != 1) bad_line(line, "\"key\" must be a single character");
    step.key = k[0];
  }
  if (j.contains("comment")) step.comment = string_field(j, "comment", line, false);
  return step;
}

std::string user_column(const InteractionRecord& rec) {
  std::string out(to_string(rec.modality.user_selected));
  if (rec.teleop_key) out += fmt::format(" ({})", *rec.teleop_key);
  return out;
}

std::string decision_column(ModuleId module, const InteractionRecord& rec) {
  switch (module) {
    case ModuleId::TP: return fmt::format("Execute \"{}\"", rec.selected_context);
    case ModuleId::IR: {
      std::string msg(display_string(recognize_intent(rec.keywords)));
      if (!msg.empty() && msg.back() == '.') msg.pop_back();
      return msg;
    }
    case ModuleId::MS: return std::string(to_string(suggest_modality(rec.selected_context, rec.base_score).suggested));
    case ModuleId::CG: return rec.top_context;
  }
  return {};
}

}  // namespace

std::vector<ScenarioStep> parse_scenario(std::istream& in) {
  std::vector<ScenarioStep> steps;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos || text[first] == '#') continue;
    steps.push_back(parse_step(text, line));
  }
  return steps;
}

std::vector<ScenarioStep> load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ScenarioError, "cannot open " + path.string());
  return parse_scenario(in);
}

std::vector<ReportRow> build_report(const AnalyticsSnapshot& snapshot, const TextSimilarity& sim,
                                    std::size_t first_record) {
  std::vector<ReportRow> rows;
  for (auto module : kModules) {
    for (std::size_t i = first_record; i < snapshot.records.size(); ++i) {
      const auto& rec = snapshot.records[i];
      ReportRow row;
      row.module = module;
      row.step = i - first_record + 1;
      row.context = rec.selected_context;
      row.score = evaluation_score(module, rec, sim);
      row.suggested = rec.modality.suggested;
      row.user = user_column(rec);
      row.satisfaction = classify_satisfaction(rec).level;
      row.decision = decision_column(module, rec);
      row.comment = rec.comment.value_or("");
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

ScenarioReport run_scenario(Orchestrator& orchestrator, const std::vector<ScenarioStep>& steps,
                            const ScenarioOptions& options) {
  ScenarioReport report;
  const auto first_record = orchestrator.analytics().interactions();

  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& step = steps[i];
    if (options.clock) options.clock->set(options.start_ms + static_cast<std::int64_t>(i) * options.tick_ms);
    try {
      auto session = orchestrator.create_session();
      orchestrator.submit_keywords(session, step.keywords);

      DispatchRequest req;
      req.index = step.index;
      req.custom_text = step.custom;
      req.transcript = step.transcript;
      req.modality = step.modality;
      req.robot_id = step.robot;
      req.teleop_key = step.key;
      req.comment = step.comment;

      StepResult result;
      result.dispatch = orchestrator.dispatch(session, req);
      result.terminal = orchestrator.wait_for_terminal(result.dispatch.envelope.sequence, options.feedback_timeout);
      if (!result.terminal)
        throw Error(ErrorCode::ScenarioError,
                    fmt::format("no terminal feedback for command #{}", result.dispatch.envelope.sequence));
      report.steps.push_back(std::move(result));
    } catch (const Error& e) {
      report.error = fmt::format("step {}: {}", i + 1, e.what());
      break;
    }
  }
  report.rows = build_report(orchestrator.analytics(), orchestrator.similarity(), first_record);
  return report;
}

std::string render_table(const std::vector<ReportRow>& rows) {
  std::vector<std::array<std::string, 8>> cells;
  cells.push_back({"LLM", "Context", "Score", "Sug.", "User", "Sat.", "Decision", "Com."});
  for (const auto& r : rows)
    cells.push_back({std::string(to_string(r.module)), r.context, fmt::format("{:.2f}", r.score),
                     std::string(to_string(r.suggested)), r.user, std::string(to_string(r.satisfaction)), r.decision,
                     r.comment});

  std::array<std::size_t, 8> width{};
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::string out;
  auto emit = [&](const std::array<std::string, 8>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += " | ";
      line += row[c];
      if (c + 1 < row.size()) line.append(width[c] - row[c].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  };
  emit(cells[0]);
  std::string rule;
  for (std::size_t c = 0; c < width.size(); ++c) {
    if (c) rule += "-+-";
    rule.append(width[c], '-');
  }
  out += rule + '\n';
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
  return out;
}

nlohmann::ordered_json render_json(const ScenarioReport& report) {
  nlohmann::ordered_json j;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["module"] = std::string(to_string(r.module));
    row["step"] = r.step;
    row["context"] = r.context;
    row["score"] = r.score;
    row["suggested"] = std::string(to_string(r.suggested));
    row["user"] = r.user;
    row["satisfaction"] = std::string(to_string(r.satisfaction));
    row["decision"] = r.decision;
    row["comment"] = r.comment;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : report.steps) {
    nlohmann::ordered_json step;
    step["sequence"] = s.dispatch.envelope.sequence;
    step["target"] = s.dispatch.envelope.target;
    step["command"] = s.dispatch.envelope.command;
    step["terminal"] = s.terminal ? std::string(to_string(s.terminal->status)) : std::string();
    step["detail"] = s.terminal ? s.terminal->detail : std::string();
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  j["error"] = report.error ? nlohmann::ordered_json(*report.error) : nlohmann::ordered_json();
  return j;
}

}  // namespace swarmchat
