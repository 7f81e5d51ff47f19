#include "swarmchat/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "json_util.hpp"

namespace swarmchat {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyKeywords: return "EmptyKeywords";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BadModality: return "BadModality";
    case ErrorCode::InvalidEnvelope: return "InvalidEnvelope";
    case ErrorCode::UndefinedSimilarity: return "UndefinedSimilarity";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::UnknownRobot: return "UnknownRobot";
    case ErrorCode::MissingTeleopKey: return "MissingTeleopKey";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::UnrecognizedCommand: return "UnrecognizedCommand";
    case ErrorCode::BatteryDepleted: return "BatteryDepleted";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::BrokerError: return "BrokerError";
    case ErrorCode::InvalidTopic: return "InvalidTopic";
    case ErrorCode::BadFrame: return "BadFrame";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ScenarioError: return "ScenarioError";
  }
  return "Unknown";
}

namespace {

bool is_separator(unsigned char c) {
  // Bytes >= 0x80 belong to UTF-8 sequences and stay inside tokens.
  return c < 0x80 && !std::isalnum(c);
}

std::string normalize_token(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (unsigned char c : token) {
    if (c < 0x80 && std::isspace(c)) continue;
    out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return out;
}

}  // namespace

KeywordSet::KeywordSet(std::initializer_list<std::string_view> tokens) {
  for (auto t : tokens) insert(t);
}

bool KeywordSet::insert(std::string_view token) {
  auto norm = normalize_token(token);
  if (norm.empty() || contains(norm)) return false;
  tokens_.push_back(std::move(norm));
  return true;
}

bool KeywordSet::contains(std::string_view token) const {
  return std::find(tokens_.begin(), tokens_.end(), token) != tokens_.end();
}

std::string KeywordSet::join(std::string_view sep) const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out += sep;
    out += tokens_[i];
  }
  return out;
}

bool KeywordSet::same_members(const KeywordSet& other) const {
  if (size() != other.size()) return false;
  return std::all_of(tokens_.begin(), tokens_.end(), [&](const auto& t) { return other.contains(t); });
}

KeywordSet split_tokens(std::string_view text) {
  KeywordSet set;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || is_separator(static_cast<unsigned char>(text[i]))) {
      if (i > start) set.insert(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return set;
}

KeywordSet tokenize(std::string_view text) {
  auto set = split_tokens(text);
  if (set.empty()) throw Error(ErrorCode::EmptyKeywords, "no keywords in input");
  return set;
}

std::string_view to_string(Modality m) noexcept {
  switch (m) {
    case Modality::Text: return "Text";
    case Modality::Voice: return "Voice";
    case Modality::Teleop: return "Teleop";
  }
  return "Text";
}

Modality parse_modality(std::string_view s) {
  if (s == "Text") return Modality::Text;
  if (s == "Voice") return Modality::Voice;
  if (s == "Teleop") return Modality::Teleop;
  throw Error(ErrorCode::BadModality, std::string(s));
}

std::string_view to_string(FeedbackStatus s) noexcept {
  switch (s) {
    case FeedbackStatus::Received: return "Received";
    case FeedbackStatus::Executing: return "Executing";
    case FeedbackStatus::Completed: return "Completed";
    case FeedbackStatus::Failed: return "Failed";
  }
  return "Failed";
}

FeedbackStatus parse_feedback_status(std::string_view s) {
  if (s == "Received") return FeedbackStatus::Received;
  if (s == "Executing") return FeedbackStatus::Executing;
  if (s == "Completed") return FeedbackStatus::Completed;
  if (s == "Failed") return FeedbackStatus::Failed;
  throw Error(ErrorCode::MalformedMessage, "unknown feedback status " + std::string(s));
}

double normalize_heading(double radians) noexcept {
  double h = std::remainder(radians, 2.0 * std::numbers::pi);
  if (h <= -std::numbers::pi) h += 2.0 * std::numbers::pi;
  return h;
}

RobotState normalized(RobotState state) noexcept {
  state.pose.heading = normalize_heading(state.pose.heading);
  state.battery = std::clamp(state.battery, 0.0, 100.0);
  return state;
}

std::string encode_envelope(const CommandEnvelope& env) {
  if (env.target.empty()) throw Error(ErrorCode::InvalidEnvelope, "target must be nonempty");
  if (env.command.empty()) throw Error(ErrorCode::InvalidEnvelope, "command must be nonempty");
  return detail::dump(detail::envelope_to_json(env));
}

namespace detail {

CommandEnvelope envelope_from_json(const ordered_json& doc) {
  CommandEnvelope env;
  env.target = require_string(doc, "target");
  env.command = require_string(doc, "command");
  const auto& modality = require(doc, "modality");
  if (!modality.is_string()) throw Error(ErrorCode::BadModality, modality.dump());
  env.modality = parse_modality(modality.get<std::string>());
  env.sequence = require_unsigned(doc, "sequence");
  env.issued_at = require_integer(doc, "issued_at");
  if (env.target.empty()) throw Error(ErrorCode::MalformedMessage, "target must be nonempty");
  if (env.command.empty()) throw Error(ErrorCode::MalformedMessage, "command must be nonempty");
  return env;
}

}  // namespace detail

CommandEnvelope decode_envelope(std::string_view bytes) {
  return detail::envelope_from_json(detail::parse_object(bytes));
}

std::string encode_feedback(const FeedbackEnvelope& fb) {
  detail::ordered_json j;
  j["robot_id"] = fb.robot_id;
  j["command_sequence"] = fb.command_sequence;
  j["status"] = std::string(to_string(fb.status));
  j["detail"] = fb.detail;
  j["state_snapshot"] = detail::state_to_json(fb.state_snapshot);
  return detail::dump(j);
}

FeedbackEnvelope decode_feedback(std::string_view bytes) {
  auto doc = detail::parse_object(bytes);
  FeedbackEnvelope fb;
  fb.robot_id = detail::require_string(doc, "robot_id");
  fb.command_sequence = detail::require_unsigned(doc, "command_sequence");
  fb.status = parse_feedback_status(detail::require_string(doc, "status"));
  fb.detail = detail::require_string(doc, "detail");
  fb.state_snapshot = detail::state_from_json(detail::require(doc, "state_snapshot"));
  return fb;
}

}  // namespace swarmchat
