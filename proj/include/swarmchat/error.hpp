#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swarmchat {

enum class ErrorCode {
  EmptyKeywords,
  MalformedMessage,
  MissingField,
  BadModality,
  InvalidEnvelope,
  UndefinedSimilarity,
  InvalidRatio,
  UnknownRobot,
  MissingTeleopKey,
  UnknownKey,
  UnrecognizedCommand,
  BatteryDepleted,
  NotConnected,
  BrokerError,
  InvalidTopic,
  BadFrame,
  UnknownSession,
  InvalidState,
  ConfigError,
  ScenarioError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// the HTTP layer and the scenario runner can report it by name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace swarmchat
