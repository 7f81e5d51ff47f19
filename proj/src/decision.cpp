#include "swarmchat/decision.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace swarmchat {

std::string_view to_string(IntentLabel label) noexcept {
  switch (label) {
    case IntentLabel::PatrolMode: return "PatrolMode";
    case IntentLabel::NavigationMode: return "NavigationMode";
    case IntentLabel::GeneralOperation: return "GeneralOperation";
  }
  return "GeneralOperation";
}

std::string_view display_string(IntentLabel label) noexcept {
  switch (label) {
    case IntentLabel::PatrolMode: return "Patrol mode activated.";
    case IntentLabel::NavigationMode: return "Navigation mode activated.";
    case IntentLabel::GeneralOperation: return "General operation.";
  }
  return "General operation.";
}

IntentLabel recognize_intent(const KeywordSet& keywords) {
  if (keywords.empty()) throw Error(ErrorCode::EmptyKeywords, "no keywords");
  if (keywords.contains("patrol")) return IntentLabel::PatrolMode;
  if (keywords.contains("go")) return IntentLabel::NavigationMode;
  return IntentLabel::GeneralOperation;
}

namespace {

std::string coordinate(double v) {
  auto s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

}  // namespace

PlannedCommand plan_task(std::string_view context_text, const RobotState& state, std::int64_t state_age_ms,
                         const PlannerConfig& config) {
  PlannedCommand planned;
  planned.base_context = std::string(context_text);
  planned.robot_id = state.robot_id;
  planned.state_used = state;
  planned.stale = state_age_ms > config.stale_after_ms;
  const auto battery = std::lround(std::clamp(state.battery, 0.0, 100.0));
  planned.enriched_text = fmt::format("{} [from ({},{}); battery {}%]", context_text, coordinate(state.pose.x),
                                      coordinate(state.pose.y), battery);
  return planned;
}

std::string_view to_string(SuggestionReason r) noexcept {
  switch (r) {
    case SuggestionReason::HighSimilarity: return "HighSimilarity";
    case SuggestionReason::SpeakKeyword: return "SpeakKeyword";
    case SuggestionReason::Default: return "Default";
  }
  return "Default";
}

ModalitySuggestion suggest_modality(std::string_view context_text, double score) {
  ModalitySuggestion s;
  if (score >= kTeleopThreshold) {
    s.suggested = Modality::Teleop;
    s.reason = SuggestionReason::HighSimilarity;
  } else if (split_tokens(context_text).contains("speak")) {
    s.suggested = Modality::Voice;
    s.reason = SuggestionReason::SpeakKeyword;
  }
  s.user_selected = s.suggested;
  return s;
}

Modality resolve_modality(ModalitySuggestion& suggestion, Modality user_choice) {
  suggestion.user_selected = user_choice;
  suggestion.overridden = suggestion.suggested != user_choice;
  return user_choice;
}

void SequenceCounter::advance_past(std::uint64_t seen) noexcept {
  auto cur = next_.load(std::memory_order_relaxed);
  while (cur <= seen && !next_.compare_exchange_weak(cur, seen + 1, std::memory_order_relaxed)) {
  }
}

CommandEnvelope package_command(const PlannedCommand& planned, Modality modality,
                                const std::vector<RobotSpec>& fleet, SequenceCounter& counter,
                                std::int64_t issued_at, std::optional<char> teleop_key) {
  auto known = std::any_of(fleet.begin(), fleet.end(), [&](const auto& r) { return r.id == planned.robot_id; });
  if (!known) throw Error(ErrorCode::UnknownRobot, planned.robot_id);
  if (planned.enriched_text.empty()) throw Error(ErrorCode::InvalidEnvelope, "empty command");

  CommandEnvelope env;
  env.target = planned.robot_id;
  env.command = planned.enriched_text;
  if (modality == Modality::Teleop && teleop_key) {
    env.command += ' ';
    env.command += static_cast<char>(std::toupper(static_cast<unsigned char>(*teleop_key)));
  }
  env.modality = modality;
  env.sequence = counter.next();
  env.issued_at = issued_at;
  return env;
}

}  // namespace swarmchat
