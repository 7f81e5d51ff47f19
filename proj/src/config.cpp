#include "swarmchat/config.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <sstream>

namespace swarmchat {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string(key) + ": " + e.what());
  }
}

const json* section(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return nullptr;
  if (!it->is_object()) throw Error(ErrorCode::ConfigError, std::string(key) + " must be an object");
  return &*it;
}

Pose read_pose(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ConfigError, "pose must be [x, y, heading]");
  return Pose{j[0].get<double>(), j[1].get<double>(), normalize_heading(j[2].get<double>())};
}

}  // namespace

BusEndpoint parse_endpoint(const std::string& text, const BusEndpoint& defaults) {
  BusEndpoint ep = defaults;
  auto colon = text.rfind(':');
  std::string port_text = text;
  if (colon != std::string::npos) {
    if (colon > 0) ep.host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
  } else if (!text.empty() && !std::isdigit(static_cast<unsigned char>(text[0]))) {
    ep.host = text;
    return ep;
  }
  if (port_text.empty()) return ep;
  try {
    int port = std::stoi(port_text);
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad endpoint '" + text + "'");
  }
  return ep;
}

Config Config::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  Config cfg;
  if (auto* t = section(j, "templates")) {
    read(*t, "actions", cfg.templates.actions);
    read(*t, "directions", cfg.templates.directions);
    read(*t, "tasks", cfg.templates.tasks);
    read(*t, "default_action", cfg.templates.default_action);
    read(*t, "default_direction", cfg.templates.default_direction);
    read(*t, "alternate_directions", cfg.templates.alternate_directions);
    read(*t, "task_phrases", cfg.templates.task_phrases);
    read(*t, "task_combo", cfg.templates.task_combo);
    read(*t, "no_task_first", cfg.templates.no_task_first);
    read(*t, "no_task_combo", cfg.templates.no_task_combo);
  }
  if (auto* s = section(j, "similarity")) {
    read(*s, "stopwords", cfg.similarity.stopwords);
    read(*s, "synonyms_enabled", cfg.similarity.synonyms_enabled);
    read(*s, "synonym_weight", cfg.similarity.synonym_weight);
    read(*s, "synonyms", cfg.similarity.synonyms);
  }
  if (auto* e = section(j, "external_provider")) {
    read(*e, "url", cfg.external.url);
    read(*e, "timeout_ms", cfg.external.timeout_ms);
  }
  if (auto* l = section(j, "learning")) {
    read(*l, "learning_rate", cfg.learning.learning_rate);
    read(*l, "initial_weight", cfg.learning.initial_weight);
    if (!(cfg.learning.learning_rate > 0.0 && cfg.learning.learning_rate <= 1.0))
      throw Error(ErrorCode::ConfigError, "learning_rate must be in (0, 1]");
    if (!(cfg.learning.initial_weight >= 0.0 && cfg.learning.initial_weight <= 1.0))
      throw Error(ErrorCode::ConfigError, "initial_weight must be in [0, 1]");
  }
  if (auto* p = section(j, "planner")) read(*p, "stale_after_ms", cfg.planner.stale_after_ms);
  if (auto* m = section(j, "motion")) {
    read(*m, "max_linear", cfg.motion.max_linear);
    read(*m, "max_angular", cfg.motion.max_angular);
    read(*m, "linear_speed", cfg.motion.linear_speed);
    read(*m, "angular_speed", cfg.motion.angular_speed);
    read(*m, "move_duration", cfg.motion.move_duration);
    read(*m, "step", cfg.motion.step);
    read(*m, "drain_rate", cfg.motion.drain_rate);
    if (cfg.motion.step <= 0.0) throw Error(ErrorCode::ConfigError, "motion.step must be positive");
  }
  if (auto* b = section(j, "bus")) {
    read(*b, "host", cfg.bus.host);
    read(*b, "port", cfg.bus.port);
  }
  if (auto it = j.find("robots"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::ConfigError, "robots must be an array");
    cfg.robots.clear();
    for (const auto& r : *it) {
      RobotSpec spec;
      read(r, "id", spec.id);
      if (spec.id.empty()) throw Error(ErrorCode::ConfigError, "robot id must be nonempty");
      if (auto p = r.find("start_pose"); p != r.end()) spec.start = read_pose(*p);
      read(r, "battery", spec.battery);
      cfg.robots.push_back(std::move(spec));
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

}  // namespace swarmchat
