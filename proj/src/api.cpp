#include "swarmchat/api.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "json_util.hpp"
#include "swarmchat/views.hpp"

namespace swarmchat {

namespace {

using json = nlohmann::ordered_json;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(detail::dump(body), "application/json");
}

void reply_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  json body;
  body["error"] = std::string(to_string(code));
  body["message"] = message;
  reply(res, http_status(code), body);
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j;
  try {
    j = json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedMessage, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::MalformedMessage, "expected a JSON object");
  return j;
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::MalformedMessage, std::string(key) + " must be a string");
  return it->get<std::string>();
}

DispatchRequest dispatch_request(const json& j) {
  DispatchRequest req;
  if (auto it = j.find("index"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw Error(ErrorCode::MalformedMessage, "index must be an integer");
    req.index = it->get<int>();
  }
  req.custom_text = optional_string(j, "custom_text");
  req.transcript = optional_string(j, "transcript");
  auto modality = optional_string(j, "modality");
  if (!modality) throw Error(ErrorCode::MissingField, "modality");
  req.modality = parse_modality(*modality);
  auto robot = optional_string(j, "robot");
  if (!robot) throw Error(ErrorCode::MissingField, "robot");
  req.robot_id = *robot;
  if (auto key = optional_string(j, "key"); key && !key->empty()) {
    if (key->size() != 1) throw Error(ErrorCode::UnknownKey, *key);
    req.teleop_key = (*key)[0];
  }
  req.comment = optional_string(j, "comment");
  return req;
}

template <class F>
httplib::Server::Handler guarded(F&& f) {
  return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      reply_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      json body;
      body["error"] = "Internal";
      body["message"] = e.what();
      reply(res, 500, body);
    }
  };
}

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::InvalidState: return 409;
    case ErrorCode::NotConnected:
    case ErrorCode::BrokerError: return 503;
    case ErrorCode::MalformedMessage: return 400;
    default: return 422;
  }
}

ApiServer::ApiServer(Orchestrator& orchestrator)
    : orchestrator_(orchestrator), server_(std::make_unique<httplib::Server>()) {
  routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::routes() {
  auto& s = *server_;
  auto& orch = orchestrator_;

  s.Post("/sessions", guarded([&orch](const httplib::Request&, httplib::Response& res) {
           json body;
           body["session_id"] = orch.create_session();
           reply(res, 201, body);
         }));

  s.Get(R"(/sessions/([^/]+))", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
          reply(res, 200, views::session(orch.session(req.matches[1])));
        }));

  s.Post(R"(/sessions/([^/]+)/keywords)", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
           auto body = body_of(req);
           auto text = optional_string(body, "text").value_or("");
           reply(res, 200, views::submit(orch.submit_keywords(req.matches[1], text)));
         }));

  s.Post(R"(/sessions/([^/]+)/dispatch)", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
           auto result = orch.dispatch(req.matches[1], dispatch_request(body_of(req)));
           reply(res, 200, views::dispatch(result));
         }));

  s.Post(R"(/sessions/([^/]+)/comment)", guarded([&orch](const httplib::Request& req, httplib::Response& res) {
           auto body = body_of(req);
           orch.submit_comment(req.matches[1], optional_string(body, "text").value_or(""));
           json out;
           out["stored"] = true;
           reply(res, 200, out);
         }));

  s.Get("/logs/published", guarded([&orch](const httplib::Request&, httplib::Response& res) {
          auto arr = json::array();
          for (const auto& env : orch.published_log()) arr.push_back(views::envelope(env));
          reply(res, 200, arr);
        }));

  s.Get("/logs/received", guarded([&orch](const httplib::Request&, httplib::Response& res) {
          json out = json::object();
          for (const auto& [robot, list] : orch.received_log()) {
            auto arr = json::array();
            for (const auto& env : list) arr.push_back(views::envelope(env));
            out[robot] = std::move(arr);
          }
          reply(res, 200, out);
        }));

  s.Get("/analytics", guarded([&orch](const httplib::Request&, httplib::Response& res) {
          reply(res, 200, views::analytics(orch.analytics()));
        }));

  s.Get("/robots", guarded([&orch](const httplib::Request&, httplib::Response& res) {
          auto arr = json::array();
          for (const auto& [id, state] : orch.robot_states()) arr.push_back(views::robot_state(state));
          reply(res, 200, arr);
        }));

  s.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
    auto sub = orchestrator_.subscribe_events();
    auto filter = req.has_param("session") ? req.get_param_value("session") : std::string{};
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, sub, filter](std::size_t, httplib::DataSink& sink) {
          if (!running_ || sub->closed()) {
            sink.done();
            return true;
          }
          auto event = sub->next(std::chrono::milliseconds(500));
          std::string chunk;
          if (!event) {
            chunk = ": keepalive\n\n";
          } else {
            if (!filter.empty()) {
              auto j = json::parse(*event);
              auto sid = j.value("session_id", std::string{});
              if (sid.empty() && j.contains("data") && j["data"].is_object())
                sid = j["data"].value("session_id", std::string{});
              if (!sid.empty() && sid != filter) return true;
            }
            chunk = "data: " + *event + "\n\n";
          }
          return sink.write(chunk.data(), chunk.size());
        },
        [sub](bool) { sub->close(); });
  });
}

std::uint16_t ApiServer::start(const std::string& host, std::uint16_t port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(ErrorCode::ConfigError, "cannot bind HTTP on " + host + ":" + std::to_string(port));
  running_ = true;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  spdlog::info("HTTP API listening on {}:{}", host, bound);
  return static_cast<std::uint16_t>(bound);
}

void ApiServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void ApiServer::stop() {
  if (!running_.exchange(false)) {
    if (thread_.joinable()) thread_.join();
    return;
  }
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace swarmchat
