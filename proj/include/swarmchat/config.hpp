#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "swarmchat/domain.hpp"

namespace swarmchat {

/// Word classes and phrase templates for the deterministic context generator.
/// Placeholders: {action}, {direction}, {task}.
struct TemplateTables {
  std::vector<std::string> actions{"move", "go", "run", "execute"};
  std::vector<std::string> directions{"forward", "backward", "left", "right"};
  std::vector<std::string> tasks{"patrol", "search", "return", "speak"};
  std::string default_action = "go";
  std::string default_direction = "forward";
  // Fallback directions for the third and fourth candidates, in preference order.
  std::vector<std::string> alternate_directions{"left", "right", "forward", "backward"};
  std::map<std::string, std::string> task_phrases{
      {"patrol", "{task} the area"},
      {"search", "{task} the area"},
      {"return", "{task} to base"},
      {"speak", "{task} the status"},
  };
  std::string task_combo = "{action} {direction} and {task}";
  std::string no_task_first = "{action} to the target area";
  std::string no_task_combo = "{action} {direction}";
};

struct SimilarityConfig {
  std::vector<std::string> stopwords{"the", "and", "a", "an", "to", "area", "of", "in",
                                     "on", "at", "for", "with", "please", "then"};
  // zone ~ area partial-credit rule; off by default.
  bool synonyms_enabled = false;
  double synonym_weight = 0.5;
  std::vector<std::pair<std::string, std::string>> synonyms{{"zone", "area"}};
};

struct ExternalProviderConfig {
  std::string url;  // e.g. http://127.0.0.1:9000/contexts
  int timeout_ms = 2000;
};

struct LearningConfig {
  double learning_rate = 0.1;
  double initial_weight = 0.8;
};

struct PlannerConfig {
  std::int64_t stale_after_ms = 5000;
};

struct MotionConfig {
  double max_linear = 0.5;     // m/s
  double max_angular = 1.5;    // rad/s
  double linear_speed = 0.2;   // m/s
  double angular_speed = 0.8;  // rad/s
  double move_duration = 2.0;  // s
  double step = 0.05;          // integration slice, s
  double drain_rate = 0.05;    // percent per second
};

struct RobotSpec {
  std::string id;
  Pose start;
  double battery = 100.0;
};

struct BusEndpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7447;
};

/// Parses "host:port" or ":port" / "port".
BusEndpoint parse_endpoint(const std::string& text, const BusEndpoint& defaults = {});

struct Config {
  TemplateTables templates;
  SimilarityConfig similarity;
  ExternalProviderConfig external;
  LearningConfig learning;
  PlannerConfig planner;
  MotionConfig motion;
  BusEndpoint bus;
  std::vector<RobotSpec> robots{
      {"TurtleBot 1", {0.0, 0.0, 0.0}, 100.0},
      {"TurtleBot 2", {1.0, 0.0, 0.0}, 100.0},
      {"TurtleBot 3", {2.0, 0.0, 0.0}, 100.0},
  };

  /// Reads a JSON config; absent keys keep their defaults.
  static Config load(const std::filesystem::path& path);
  static Config from_json_text(const std::string& text);
};

}  // namespace swarmchat
