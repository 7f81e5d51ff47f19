#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "swarmchat/orchestrator.hpp"

namespace httplib {
class Server;
}

namespace swarmchat {

/// HTTP front end of the orchestrator.
///
///   POST /sessions                     -> {"session_id"}
///   GET  /sessions/{id}
///   POST /sessions/{id}/keywords       {"text"}
///   POST /sessions/{id}/dispatch       {"index" | "custom_text" | "transcript", "modality", "robot", "key", "comment"}
///   POST /sessions/{id}/comment        {"text"}
///   GET  /logs/published, /logs/received, /analytics, /robots
///   GET  /events[?session=id]          server-sent events
class ApiServer {
 public:
  explicit ApiServer(Orchestrator& orchestrator);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds (port 0 picks one) and serves on a background thread. Returns the
  /// bound port; throws ConfigError when the bind fails.
  std::uint16_t start(const std::string& host, std::uint16_t port);
  /// Blocks serving until stop() is called from elsewhere.
  void wait();
  void stop();

 private:
  void routes();

  Orchestrator& orchestrator_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<bool> running_{false};
};

/// HTTP status for a library error.
int http_status(ErrorCode code) noexcept;

}  // namespace swarmchat
