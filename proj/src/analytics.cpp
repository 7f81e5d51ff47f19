#include "swarmchat/analytics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "json_util.hpp"

namespace swarmchat {

std::string_view to_string(ModuleId m) noexcept {
  switch (m) {
    case ModuleId::TP: return "TP";
    case ModuleId::IR: return "IR";
    case ModuleId::MS: return "MS";
    case ModuleId::CG: return "CG";
  }
  return "TP";
}

std::string_view to_string(SatisfactionLevel s) noexcept {
  switch (s) {
    case SatisfactionLevel::VeryHigh: return "Very High";
    case SatisfactionLevel::High: return "High";
    case SatisfactionLevel::Medium: return "Medium";
    case SatisfactionLevel::Low: return "Low";
  }
  return "Low";
}

double command_alignment(const TextSimilarity& sim, std::string_view context, std::string_view command) {
  return alignment(sim, context, command);
}

double compute_bonus(ModuleId module, const InteractionRecord& rec, const TextSimilarity& sim) {
  switch (module) {
    case ModuleId::TP: {
      auto tokens = sim.content_tokens(split_tokens(strip_enrichment(rec.final_command)));
      return tokens.contains("go") || tokens.contains("execute") ? 0.1 : 0.0;
    }
    case ModuleId::IR:
      return sim.content_tokens(rec.keywords).contains("patrol") ? 0.15 : 0.0;
    case ModuleId::MS:
      return rec.modality.suggested == rec.modality.user_selected ? 0.1 : -0.05;
    case ModuleId::CG: {
      double f = 0.0;
      try {
        f = command_alignment(sim, rec.selected_context, rec.final_command);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UndefinedSimilarity) throw;
      }
      return 0.1 * f;
    }
  }
  return 0.0;
}

double blend_score(double base, double bonus, double weight) {
  return std::clamp((base + bonus + weight) / 2.0, 0.0, 1.0);
}

ModuleLearningState update_weight(ModuleLearningState state, double score) {
  state.weight = std::clamp(state.weight + state.learning_rate * (score - state.weight), 0.0, 1.0);
  state.score_history.push_back(score);
  return state;
}

Satisfaction classify_satisfaction(const InteractionRecord& rec) {
  int c = 0;
  if (rec.base_score >= kTeleopThreshold) ++c;
  if (!rec.modality.overridden) ++c;
  if (rec.modality.user_selected == Modality::Teleop && rec.teleop_key) ++c;
  static constexpr SatisfactionLevel levels[] = {SatisfactionLevel::Low, SatisfactionLevel::Medium,
                                                 SatisfactionLevel::High, SatisfactionLevel::VeryHigh};
  return {levels[c], c};
}

double evaluation_score(ModuleId module, const InteractionRecord& rec, const TextSimilarity& sim) {
  switch (module) {
    case ModuleId::TP:
    case ModuleId::IR:
      return rec.base_score;
    case ModuleId::MS:
      return (rec.base_score + (rec.modality.overridden ? 0.6 : 1.0)) / 2.0;
    case ModuleId::CG: {
      const auto& reference = rec.top_context.empty() ? rec.selected_context : rec.top_context;
      double j = 0.0;
      try {
        j = command_alignment(sim, reference, rec.selected_context);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UndefinedSimilarity) throw;
      }
      return scale_similarity(j);
    }
  }
  return rec.base_score;
}

std::string encode_record(const InteractionRecord& rec) {
  detail::ordered_json j;
  j["type"] = "interaction";
  j["sequence"] = rec.sequence;
  j["keywords"] = rec.keywords.tokens();
  j["selected_context"] = rec.selected_context;
  j["top_context"] = rec.top_context;
  j["custom"] = rec.custom;
  j["final_command"] = rec.final_command;
  j["base_score"] = rec.base_score;
  j["suggested"] = std::string(to_string(rec.modality.suggested));
  j["reason"] = std::string(to_string(rec.modality.reason));
  j["selected"] = std::string(to_string(rec.modality.user_selected));
  j["overridden"] = rec.modality.overridden;
  j["teleop_key"] = rec.teleop_key ? detail::ordered_json(std::string(1, *rec.teleop_key)) : detail::ordered_json();
  j["comment"] = rec.comment ? detail::ordered_json(*rec.comment) : detail::ordered_json();
  j["robot_id"] = rec.robot_id;
  j["timestamp"] = rec.timestamp;
  return detail::dump(j);
}

namespace {

SuggestionReason parse_reason(const std::string& s) {
  if (s == "HighSimilarity") return SuggestionReason::HighSimilarity;
  if (s == "SpeakKeyword") return SuggestionReason::SpeakKeyword;
  return SuggestionReason::Default;
}

}  // namespace

InteractionRecord decode_record(std::string_view line) {
  auto j = detail::parse_object(line);
  InteractionRecord rec;
  rec.sequence = detail::require_unsigned(j, "sequence");
  const auto& kw = detail::require(j, "keywords");
  if (!kw.is_array()) throw Error(ErrorCode::MalformedMessage, "keywords must be an array");
  for (const auto& t : kw) rec.keywords.insert(t.get<std::string>());
  rec.selected_context = detail::require_string(j, "selected_context");
  rec.top_context = j.value("top_context", std::string{});
  rec.custom = j.value("custom", false);
  rec.final_command = detail::require_string(j, "final_command");
  rec.base_score = detail::require_number(j, "base_score");
  rec.modality.suggested = parse_modality(detail::require_string(j, "suggested"));
  rec.modality.reason = parse_reason(j.value("reason", std::string{"Default"}));
  rec.modality.user_selected = parse_modality(detail::require_string(j, "selected"));
  rec.modality.overridden = rec.modality.suggested != rec.modality.user_selected;
  if (auto it = j.find("teleop_key"); it != j.end() && it->is_string() && !it->get<std::string>().empty())
    rec.teleop_key = it->get<std::string>()[0];
  if (auto it = j.find("comment"); it != j.end() && it->is_string()) rec.comment = it->get<std::string>();
  rec.robot_id = detail::require_string(j, "robot_id");
  rec.timestamp = detail::require_integer(j, "timestamp");
  return rec;
}

LearningGraph::LearningGraph(LearningConfig config, TextSimilarity sim, std::filesystem::path log_path)
    : config_(config), sim_(std::move(sim)), log_path_(std::move(log_path)) {
  for (std::size_t i = 0; i < kModules.size(); ++i) {
    state_.modules[i].module = kModules[i];
    state_.modules[i].weight = config_.initial_weight;
    state_.modules[i].learning_rate = config_.learning_rate;
  }
  if (log_path_.empty()) return;

  if (std::ifstream in(log_path_); in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        auto doc = detail::parse_object(line);
        if (doc.value("type", std::string{}) == "comment") {
          apply_comment(detail::require_unsigned(doc, "sequence"), detail::require_string(doc, "text"));
        } else {
          apply(decode_record(line));
        }
      } catch (const Error& e) {
        spdlog::warn("{}:{}: skipping unreadable record ({})", log_path_.string(), lineno, e.what());
      }
    }
  }
  log_.open(log_path_, std::ios::app);
  if (!log_) spdlog::warn("cannot open interaction log {}", log_path_.string());
}

void LearningGraph::apply(InteractionRecord rec) {
  for (auto& module : state_.modules) {
    const double bonus = compute_bonus(module.module, rec, sim_);
    const double s = blend_score(rec.base_score, bonus, module.weight);
    module = update_weight(std::move(module), s);
    module.evaluation_history.push_back(evaluation_score(module.module, rec, sim_));
  }
  ++state_.modality_counts[static_cast<std::size_t>(rec.modality.user_selected)];
  ++state_.satisfaction_tally[static_cast<std::size_t>(classify_satisfaction(rec).level)];
  state_.records.push_back(std::move(rec));
}

bool LearningGraph::apply_comment(std::uint64_t sequence, const std::string& text) {
  auto it = std::find_if(state_.records.begin(), state_.records.end(),
                         [&](const auto& r) { return r.sequence == sequence; });
  if (it == state_.records.end()) return false;
  it->comment = text;
  return true;
}

std::optional<std::string> LearningGraph::persist(const std::string& line) {
  if (log_path_.empty()) return std::nullopt;
  if (!log_ || !(log_ << line << '\n') || !log_.flush()) {
    log_.clear();
    return "failed to append to " + log_path_.string();
  }
  return std::nullopt;
}

LearningGraph::Outcome LearningGraph::record_interaction(InteractionRecord rec) {
  std::lock_guard lock(mu_);
  auto line = encode_record(rec);
  apply(std::move(rec));
  auto warning = persist(line);
  if (warning) spdlog::warn("{}", *warning);
  return {state_, warning};
}

bool LearningGraph::attach_comment(std::uint64_t sequence, const std::string& text) {
  if (text.empty()) return true;
  std::lock_guard lock(mu_);
  if (!apply_comment(sequence, text)) return false;
  detail::ordered_json j;
  j["type"] = "comment";
  j["sequence"] = sequence;
  j["text"] = text;
  if (auto warning = persist(detail::dump(j))) spdlog::warn("{}", *warning);
  return true;
}

AnalyticsSnapshot LearningGraph::snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

}  // namespace swarmchat
