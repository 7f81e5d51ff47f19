#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmchat/error.hpp"

namespace swarmchat {

/// Ordered set of normalized keyword tokens. Tokens are lowercase, trimmed
/// and unique; insertion order is kept for display.
class KeywordSet {
 public:
  KeywordSet() = default;
  KeywordSet(std::initializer_list<std::string_view> tokens);

  template <typename Range>
  static KeywordSet from_range(const Range& tokens) {
    KeywordSet set;
    for (const auto& t : tokens) set.insert(t);
    return set;
  }

  /// Normalizes and appends; returns false if the token was empty or present.
  bool insert(std::string_view token);

  bool contains(std::string_view token) const;
  bool empty() const noexcept { return tokens_.empty(); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  std::string join(std::string_view sep = " ") const;

  /// Order-insensitive comparison.
  bool same_members(const KeywordSet& other) const;

  friend bool operator==(const KeywordSet&, const KeywordSet&) = default;

 private:
  std::vector<std::string> tokens_;
};

/// Splits on whitespace and ASCII punctuation, lowercases, dedups.
/// Throws EmptyKeywords when nothing is left.
KeywordSet tokenize(std::string_view text);

/// Same split rule without the non-empty requirement.
KeywordSet split_tokens(std::string_view text);

enum class Modality { Text, Voice, Teleop };

std::string_view to_string(Modality m) noexcept;
/// Throws BadModality for anything but the three exact literals.
Modality parse_modality(std::string_view s);

struct Pose {
  double x = 0.0;        // meters
  double y = 0.0;        // meters
  double heading = 0.0;  // radians, (-pi, pi]

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Maps any angle onto (-pi, pi].
double normalize_heading(double radians) noexcept;

struct RobotState {
  std::string robot_id;
  Pose pose;
  double battery = 100.0;  // percent, [0, 100]
  std::string status = "idle";

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

/// Returns the state with heading normalized and battery clamped.
RobotState normalized(RobotState state) noexcept;

struct CommandEnvelope {
  std::string target;
  std::string command;
  Modality modality = Modality::Text;
  std::uint64_t sequence = 0;
  std::int64_t issued_at = 0;  // wall-clock milliseconds

  friend bool operator==(const CommandEnvelope&, const CommandEnvelope&) = default;
};

enum class FeedbackStatus { Received, Executing, Completed, Failed };

std::string_view to_string(FeedbackStatus s) noexcept;
FeedbackStatus parse_feedback_status(std::string_view s);

inline bool is_terminal(FeedbackStatus s) noexcept {
  return s == FeedbackStatus::Completed || s == FeedbackStatus::Failed;
}

struct FeedbackEnvelope {
  std::string robot_id;
  std::uint64_t command_sequence = 0;
  FeedbackStatus status = FeedbackStatus::Received;
  std::string detail;
  RobotState state_snapshot;

  friend bool operator==(const FeedbackEnvelope&, const FeedbackEnvelope&) = default;
};

// Canonical JSON codecs: fixed key order, no insignificant whitespace.
// Decoders ignore unknown extra fields.

std::string encode_envelope(const CommandEnvelope& env);
CommandEnvelope decode_envelope(std::string_view bytes);

std::string encode_feedback(const FeedbackEnvelope& fb);
FeedbackEnvelope decode_feedback(std::string_view bytes);

}  // namespace swarmchat
