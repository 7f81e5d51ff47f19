#pragma once

// Private helpers shared by the codec translation units.

#include <json.hpp>

#include <string>
#include <string_view>

#include "swarmchat/domain.hpp"
#include "swarmchat/error.hpp"

namespace swarmchat::detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json parse_object(std::string_view bytes) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(bytes.begin(), bytes.end());
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorCode::MalformedMessage, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::MalformedMessage, "expected a JSON object");
  return doc;
}

inline const ordered_json& require(const ordered_json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end() || it->is_null()) throw Error(ErrorCode::MissingField, field);
  return *it;
}

inline std::string require_string(const ordered_json& doc, const char* field) {
  const auto& v = require(doc, field);
  if (!v.is_string()) throw Error(ErrorCode::MalformedMessage, std::string(field) + " must be a string");
  return v.get<std::string>();
}

inline std::uint64_t require_unsigned(const ordered_json& doc, const char* field) {
  const auto& v = require(doc, field);
  if (!v.is_number_unsigned()) throw Error(ErrorCode::MalformedMessage, std::string(field) + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::int64_t require_integer(const ordered_json& doc, const char* field) {
  const auto& v = require(doc, field);
  if (!v.is_number_integer()) throw Error(ErrorCode::MalformedMessage, std::string(field) + " must be an integer");
  return v.get<std::int64_t>();
}

inline double require_number(const ordered_json& doc, const char* field) {
  const auto& v = require(doc, field);
  if (!v.is_number()) throw Error(ErrorCode::MalformedMessage, std::string(field) + " must be a number");
  return v.get<double>();
}

inline ordered_json state_to_json(const RobotState& s) {
  ordered_json j;
  j["robot_id"] = s.robot_id;
  j["pose"] = ordered_json{{"x", s.pose.x}, {"y", s.pose.y}, {"heading", s.pose.heading}};
  j["battery"] = s.battery;
  j["status"] = s.status;
  return j;
}

inline RobotState state_from_json(const ordered_json& j) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedMessage, "state_snapshot must be an object");
  RobotState s;
  s.robot_id = require_string(j, "robot_id");
  const auto& pose = require(j, "pose");
  if (!pose.is_object()) throw Error(ErrorCode::MalformedMessage, "pose must be an object");
  s.pose.x = require_number(pose, "x");
  s.pose.y = require_number(pose, "y");
  s.pose.heading = require_number(pose, "heading");
  s.battery = require_number(j, "battery");
  s.status = require_string(j, "status");
  return s;
}

inline ordered_json envelope_to_json(const CommandEnvelope& env) {
  ordered_json j;
  j["target"] = env.target;
  j["command"] = env.command;
  j["modality"] = std::string(to_string(env.modality));
  j["sequence"] = env.sequence;
  j["issued_at"] = env.issued_at;
  return j;
}

CommandEnvelope envelope_from_json(const ordered_json& doc);

inline std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

}  // namespace swarmchat::detail
