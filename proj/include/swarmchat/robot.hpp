#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "swarmchat/bus.hpp"
#include "swarmchat/config.hpp"
#include "swarmchat/domain.hpp"

namespace swarmchat {

struct VelocityCommand {
  double linear = 0.0;    // m/s
  double angular = 0.0;   // rad/s
  double duration = 0.0;  // s, > 0
};

enum class Primitive { Patrol, Forward, Backward, TurnLeft, TurnRight, Halt };

std::string_view to_string(Primitive p) noexcept;

struct MotionPlan {
  std::string label;
  std::vector<VelocityCommand> steps;

  double total_duration() const noexcept;
};

enum class Acceptance { Accept, Ignore };

/// Exact, case-sensitive target match.
Acceptance accept_envelope(const CommandEnvelope& env, std::string_view my_id) noexcept;

/// P -> patrol; F/W forward; B/S backward; L/A turn left; R/D turn right.
/// Case-insensitive. Throws UnknownKey.
Primitive map_teleop_key(char key);

/// Text/Voice: keyword scan of the enrichment-free text with precedence
/// patrol > forward > backward > left > right > stop. Teleop: the trailing
/// single-character token is the key. Throws UnrecognizedCommand / UnknownKey.
Primitive interpret_command(std::string_view command_text, Modality modality);

MotionPlan to_velocity(Primitive primitive, const MotionConfig& config = {});

/// Unicycle integration over `dt` seconds with battery drain. Throws
/// BatteryDepleted when the battery is already empty.
RobotState step_kinematics(const RobotState& state, const VelocityCommand& v, double dt,
                           const MotionConfig& config = {});

/// Deterministic single-robot simulation: target filtering, interpretation,
/// sliced integration and the feedback lifecycle. No I/O.
class RobotSimulator {
 public:
  using Emit = std::function<void(const FeedbackEnvelope&)>;
  using StepObserver = std::function<void(const RobotState&, double dt)>;

  RobotSimulator(RobotState initial, MotionConfig config = {});

  /// Ignore produces no feedback. Accept emits Received, then either
  /// Executing + Completed or a single Failed.
  Acceptance handle(const CommandEnvelope& env, const Emit& emit);

  /// Runs the plan in `step`-sized slices, the last slice taking the remainder.
  void execute(const MotionPlan& plan);

  const RobotState& state() const noexcept { return state_; }
  void set_step_observer(StepObserver observer) { observer_ = std::move(observer); }

 private:
  FeedbackEnvelope feedback(std::uint64_t seq, FeedbackStatus status, std::string detail) const;

  RobotState state_;
  MotionConfig config_;
  StepObserver observer_;
};

/// Bounded queue of feedback awaiting a working bus; oldest dropped past
/// capacity.
class FeedbackOutbox {
 public:
  using Publish = std::function<void(const std::string&)>;

  explicit FeedbackOutbox(Publish publish, std::size_t capacity = 100)
      : publish_(std::move(publish)), capacity_(capacity) {}

  /// Tries to flush the backlog and then `payload`; buffers on failure.
  void send(std::string payload);
  /// Returns true when the backlog is empty afterwards.
  bool flush();
  std::size_t pending() const;
  std::size_t dropped() const noexcept { return dropped_; }

 private:
  bool flush_locked();

  Publish publish_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<std::string> backlog_;
  std::size_t dropped_ = 0;
};

struct RobotNodeOptions {
  RobotState initial;
  MotionConfig motion;
  BusEndpoint broker;
  std::filesystem::path received_log;  // empty: no file
  bool realtime = false;               // sleep each slice in wall-clock time
};

/// A robot process on the bus: command subscriber, simulation loop and
/// feedback publisher.
class RobotNode {
 public:
  explicit RobotNode(RobotNodeOptions options);
  ~RobotNode();
  RobotNode(const RobotNode&) = delete;
  RobotNode& operator=(const RobotNode&) = delete;

  /// Connects and subscribes; returns once the subscription is active.
  void start();
  void stop();

  const std::string& id() const noexcept { return options_.initial.robot_id; }
  RobotState state() const;
  std::vector<CommandEnvelope> received() const;

 private:
  void run();

  RobotNodeOptions options_;
  BusClient client_;
  std::shared_ptr<Subscription> commands_;
  std::unique_ptr<FeedbackOutbox> outbox_;
  std::atomic<bool> running_{false};
  std::thread worker_;
  mutable std::mutex mu_;
  RobotSimulator sim_;
  RobotState snapshot_;
  std::vector<CommandEnvelope> received_;
  std::ofstream received_log_;
};

}  // namespace swarmchat
