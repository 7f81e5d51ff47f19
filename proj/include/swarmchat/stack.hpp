#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "swarmchat/bus.hpp"
#include "swarmchat/config.hpp"
#include "swarmchat/orchestrator.hpp"
#include "swarmchat/robot.hpp"

namespace swarmchat {

struct StackOptions {
  Config config;
  std::filesystem::path data_dir;  // empty: in-memory only
  std::optional<BusEndpoint> broker;  // external broker; unset starts one on an ephemeral port
  bool spawn_robots = true;
  bool realtime = false;
  Clock clock;
  ContextProvider provider;
};

/// Broker, one robot node per configured robot and the orchestrator, all in
/// one process. Used by tests and by `swarmchat --embedded-stack`.
class LocalStack {
 public:
  explicit LocalStack(StackOptions options);
  ~LocalStack();
  LocalStack(const LocalStack&) = delete;
  LocalStack& operator=(const LocalStack&) = delete;

  void start();
  void stop();

  Orchestrator& orchestrator() { return *orchestrator_; }
  Broker* broker() { return broker_.get(); }
  const std::vector<std::unique_ptr<RobotNode>>& robots() const { return robots_; }
  BusEndpoint endpoint() const { return endpoint_; }

 private:
  StackOptions options_;
  BusEndpoint endpoint_;
  std::unique_ptr<Broker> broker_;
  std::vector<std::unique_ptr<RobotNode>> robots_;
  std::unique_ptr<Orchestrator> orchestrator_;
  bool started_ = false;
};

}  // namespace swarmchat
