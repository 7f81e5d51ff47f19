#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmchat/config.hpp"
#include "swarmchat/context.hpp"
#include "swarmchat/domain.hpp"

namespace swarmchat {

enum class IntentLabel { PatrolMode, NavigationMode, GeneralOperation };

std::string_view to_string(IntentLabel label) noexcept;
/// "Patrol mode activated." etc.
std::string_view display_string(IntentLabel label) noexcept;

/// patrol wins over go; anything else is a general operation.
IntentLabel recognize_intent(const KeywordSet& keywords);

struct PlannedCommand {
  std::string base_context;
  std::string enriched_text;
  std::string robot_id;
  RobotState state_used;
  bool stale = false;  // snapshot older than the planner threshold
};

/// Appends " [from (x,y); battery N%]" using the robot snapshot.
/// `state_age_ms` is the snapshot age; a stale snapshot only sets the flag.
PlannedCommand plan_task(std::string_view context_text, const RobotState& state, std::int64_t state_age_ms = 0,
                         const PlannerConfig& config = {});

enum class SuggestionReason { HighSimilarity, SpeakKeyword, Default };

std::string_view to_string(SuggestionReason r) noexcept;

struct ModalitySuggestion {
  Modality suggested = Modality::Text;
  SuggestionReason reason = SuggestionReason::Default;
  Modality user_selected = Modality::Text;
  bool overridden = false;
};

inline constexpr double kTeleopThreshold = 0.85;

/// score >= 0.85 -> Teleop; text mentions "speak" -> Voice; otherwise Text.
ModalitySuggestion suggest_modality(std::string_view context_text, double score);

/// The user's choice always wins; records whether it differs from the suggestion.
Modality resolve_modality(ModalitySuggestion& suggestion, Modality user_choice);

/// Session-wide monotone sequence source. Thread-safe.
class SequenceCounter {
 public:
  explicit SequenceCounter(std::uint64_t next = 1) : next_(next) {}
  std::uint64_t next() noexcept { return next_.fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t peek() const noexcept { return next_.load(std::memory_order_relaxed); }
  void advance_past(std::uint64_t seen) noexcept;

 private:
  std::atomic<std::uint64_t> next_;
};

/// Builds the envelope for a known robot. For Teleop the key is appended as
/// the trailing token of the command text. Throws UnknownRobot.
CommandEnvelope package_command(const PlannedCommand& planned, Modality modality,
                                const std::vector<RobotSpec>& fleet, SequenceCounter& counter,
                                std::int64_t issued_at, std::optional<char> teleop_key = std::nullopt);

}  // namespace swarmchat
