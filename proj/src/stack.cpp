#include "swarmchat/stack.hpp"

#include <cctype>

namespace swarmchat {

namespace {

std::string file_stem_for(const std::string& robot_id) {
  std::string out;
  for (unsigned char c : robot_id) out += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
  return out;
}

}  // namespace

LocalStack::LocalStack(StackOptions options) : options_(std::move(options)) {}

LocalStack::~LocalStack() { stop(); }

void LocalStack::start() {
  if (started_) return;
  if (options_.broker) {
    endpoint_ = *options_.broker;
  } else {
    broker_ = std::make_unique<Broker>(BusEndpoint{"127.0.0.1", 0});
    broker_->start();
    endpoint_ = BusEndpoint{"127.0.0.1", broker_->port()};
  }
  if (!options_.data_dir.empty()) std::filesystem::create_directories(options_.data_dir);

  if (options_.spawn_robots) {
    for (const auto& spec : options_.config.robots) {
      RobotNodeOptions ro;
      ro.initial = RobotState{spec.id, spec.start, spec.battery, "idle"};
      ro.motion = options_.config.motion;
      ro.broker = endpoint_;
      ro.realtime = options_.realtime;
      if (!options_.data_dir.empty())
        ro.received_log = options_.data_dir / ("robot-" + file_stem_for(spec.id) + ".jsonl");
      auto node = std::make_unique<RobotNode>(std::move(ro));
      node->start();
      robots_.push_back(std::move(node));
    }
  }

  OrchestratorOptions oo;
  oo.config = options_.config;
  oo.broker = endpoint_;
  oo.data_dir = options_.data_dir;
  oo.clock = options_.clock;
  oo.provider = options_.provider;
  orchestrator_ = std::make_unique<Orchestrator>(std::move(oo));
  orchestrator_->start();
  started_ = true;
}

void LocalStack::stop() {
  if (!started_) return;
  started_ = false;
  if (orchestrator_) orchestrator_->stop();
  for (auto& r : robots_) r->stop();
  if (broker_) broker_->stop();
}

}  // namespace swarmchat
