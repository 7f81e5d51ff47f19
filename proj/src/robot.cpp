#include "swarmchat/robot.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <cmath>
#include <numbers>

#include "swarmchat/context.hpp"

namespace swarmchat {

std::string_view to_string(Primitive p) noexcept {
  switch (p) {
    case Primitive::Patrol: return "patrol";
    case Primitive::Forward: return "forward";
    case Primitive::Backward: return "backward";
    case Primitive::TurnLeft: return "turn-left";
    case Primitive::TurnRight: return "turn-right";
    case Primitive::Halt: return "halt";
  }
  return "halt";
}

double MotionPlan::total_duration() const noexcept {
  double t = 0.0;
  for (const auto& s : steps) t += s.duration;
  return t;
}

Acceptance accept_envelope(const CommandEnvelope& env, std::string_view my_id) noexcept {
  return env.target == my_id ? Acceptance::Accept : Acceptance::Ignore;
}

Primitive map_teleop_key(char key) {
  switch (std::toupper(static_cast<unsigned char>(key))) {
    case 'P': return Primitive::Patrol;
    case 'F':
    case 'W': return Primitive::Forward;
    case 'B':
    case 'S': return Primitive::Backward;
    case 'L':
    case 'A': return Primitive::TurnLeft;
    case 'R':
    case 'D': return Primitive::TurnRight;
    default: throw Error(ErrorCode::UnknownKey, std::string(1, key));
  }
}

Primitive interpret_command(std::string_view command_text, Modality modality) {
  if (modality == Modality::Teleop) {
    auto end = command_text.find_last_not_of(" \t\r\n");
    if (end == std::string_view::npos) throw Error(ErrorCode::UnknownKey, "missing teleop key");
    auto start = command_text.find_last_of(" \t\r\n", end);
    auto key = command_text.substr(start == std::string_view::npos ? 0 : start + 1, end + 1 - (start + 1));
    if (key.size() != 1) throw Error(ErrorCode::UnknownKey, "missing teleop key");
    return map_teleop_key(key[0]);
  }
  static constexpr std::pair<std::string_view, Primitive> scan[] = {
      {"patrol", Primitive::Patrol}, {"forward", Primitive::Forward}, {"backward", Primitive::Backward},
      {"left", Primitive::TurnLeft}, {"right", Primitive::TurnRight}, {"stop", Primitive::Halt},
  };
  const auto tokens = split_tokens(strip_enrichment(command_text));
  for (const auto& [word, primitive] : scan)
    if (tokens.contains(word)) return primitive;
  throw Error(ErrorCode::UnrecognizedCommand, "unrecognized command");
}

MotionPlan to_velocity(Primitive primitive, const MotionConfig& config) {
  const double v = std::min(config.linear_speed, config.max_linear);
  const double w = std::min(config.angular_speed, config.max_angular);
  const double turn = (std::numbers::pi / 2.0) / w;
  const VelocityCommand forward{v, 0.0, config.move_duration};
  const VelocityCommand left{0.0, w, turn};

  MotionPlan plan;
  plan.label = std::string(to_string(primitive));
  switch (primitive) {
    case Primitive::Patrol:
      for (int side = 0; side < 4; ++side) {
        plan.steps.push_back(forward);
        plan.steps.push_back(left);
      }
      break;
    case Primitive::Forward: plan.steps.push_back(forward); break;
    case Primitive::Backward: plan.steps.push_back({-v, 0.0, config.move_duration}); break;
    case Primitive::TurnLeft: plan.steps.push_back(left); break;
    case Primitive::TurnRight: plan.steps.push_back({0.0, -w, turn}); break;
    case Primitive::Halt: plan.steps.push_back({0.0, 0.0, config.step}); break;
  }
  return plan;
}

RobotState step_kinematics(const RobotState& state, const VelocityCommand& v, double dt, const MotionConfig& config) {
  if (state.battery <= 0.0) throw Error(ErrorCode::BatteryDepleted, state.robot_id);
  RobotState next = state;
  next.pose.x += v.linear * std::cos(state.pose.heading) * dt;
  next.pose.y += v.linear * std::sin(state.pose.heading) * dt;
  next.pose.heading = normalize_heading(state.pose.heading + v.angular * dt);
  next.battery = std::max(0.0, state.battery - config.drain_rate * dt);
  return next;
}

RobotSimulator::RobotSimulator(RobotState initial, MotionConfig config)
    : state_(normalized(std::move(initial))), config_(config) {}

FeedbackEnvelope RobotSimulator::feedback(std::uint64_t seq, FeedbackStatus status, std::string detail) const {
  return FeedbackEnvelope{state_.robot_id, seq, status, std::move(detail), state_};
}

void RobotSimulator::execute(const MotionPlan& plan) {
  for (const auto& cmd : plan.steps) {
    const auto full = static_cast<long>(std::floor(cmd.duration / config_.step + 1e-9));
    for (long i = 0; i < full; ++i) {
      state_ = step_kinematics(state_, cmd, config_.step, config_);
      if (observer_) observer_(state_, config_.step);
    }
    const double rest = cmd.duration - static_cast<double>(full) * config_.step;
    if (rest > 1e-12) {
      state_ = step_kinematics(state_, cmd, rest, config_);
      if (observer_) observer_(state_, rest);
    }
  }
}

Acceptance RobotSimulator::handle(const CommandEnvelope& env, const Emit& emit) {
  if (accept_envelope(env, state_.robot_id) == Acceptance::Ignore) return Acceptance::Ignore;
  emit(feedback(env.sequence, FeedbackStatus::Received, env.command));

  MotionPlan plan;
  try {
    plan = to_velocity(interpret_command(env.command, env.modality), config_);
  } catch (const Error& e) {
    emit(feedback(env.sequence, FeedbackStatus::Failed, e.what()));
    return Acceptance::Accept;
  }

  const double energy = config_.drain_rate * plan.total_duration();
  if (state_.battery <= 0.0 || state_.battery < energy) {
    state_.status = "battery depleted";
    emit(feedback(env.sequence, FeedbackStatus::Failed, "battery depleted"));
    return Acceptance::Accept;
  }

  state_.status = "executing " + plan.label;
  emit(feedback(env.sequence, FeedbackStatus::Executing, plan.label));
  try {
    execute(plan);
  } catch (const Error& e) {
    state_.status = "battery depleted";
    emit(feedback(env.sequence, FeedbackStatus::Failed, e.what()));
    return Acceptance::Accept;
  }
  state_.status = "idle";
  emit(feedback(env.sequence, FeedbackStatus::Completed, plan.label));
  return Acceptance::Accept;
}

// ---------------------------------------------------------------------------

bool FeedbackOutbox::flush_locked() {
  while (!backlog_.empty()) {
    try {
      publish_(backlog_.front());
    } catch (const Error&) {
      return false;
    }
    backlog_.pop_front();
  }
  return true;
}

void FeedbackOutbox::send(std::string payload) {
  std::lock_guard lock(mu_);
  backlog_.push_back(std::move(payload));
  if (backlog_.size() > capacity_) {
    backlog_.pop_front();
    ++dropped_;
  }
  flush_locked();
}

bool FeedbackOutbox::flush() {
  std::lock_guard lock(mu_);
  return flush_locked();
}

std::size_t FeedbackOutbox::pending() const {
  std::lock_guard lock(mu_);
  return backlog_.size();
}

// ---------------------------------------------------------------------------

RobotNode::RobotNode(RobotNodeOptions options)
    : options_(std::move(options)), sim_(options_.initial, options_.motion), snapshot_(sim_.state()) {}

RobotNode::~RobotNode() { stop(); }

void RobotNode::start() {
  if (running_) return;
  client_.connect(options_.broker);
  commands_ = client_.subscribe(kCommandTopic);
  outbox_ = std::make_unique<FeedbackOutbox>(
      [this](const std::string& payload) { client_.publish(kFeedbackTopic, payload); });
  if (!options_.received_log.empty()) {
    received_log_.open(options_.received_log, std::ios::app);
    if (!received_log_) spdlog::warn("{}: cannot open {}", id(), options_.received_log.string());
  }
  snapshot_ = sim_.state();
  sim_.set_step_observer([this](const RobotState& s, double dt) {
    {
      std::lock_guard lock(mu_);
      snapshot_ = s;
    }
    if (options_.realtime) std::this_thread::sleep_for(std::chrono::duration<double>(dt));
  });
  running_ = true;
  worker_ = std::thread([this] { run(); });
}

void RobotNode::stop() {
  if (!running_.exchange(false)) return;
  if (worker_.joinable()) worker_.join();
  client_.close();
}

RobotState RobotNode::state() const {
  std::lock_guard lock(mu_);
  return snapshot_;
}

std::vector<CommandEnvelope> RobotNode::received() const {
  std::lock_guard lock(mu_);
  return received_;
}

void RobotNode::run() {
  while (running_) {
    auto payload = commands_->next(std::chrono::milliseconds(50));
    if (!payload) {
      if (commands_->closed()) {
        spdlog::warn("{}: command stream closed", id());
        break;
      }
      outbox_->flush();
      continue;
    }
    CommandEnvelope env;
    try {
      env = decode_envelope(*payload);
    } catch (const Error& e) {
      spdlog::warn("{}: dropping undecodable command ({})", id(), e.what());
      continue;
    }
    if (accept_envelope(env, id()) == Acceptance::Ignore) continue;
    {
      std::lock_guard lock(mu_);
      received_.push_back(env);
      if (received_log_.is_open()) received_log_ << encode_envelope(env) << '\n' << std::flush;
    }
    spdlog::debug("{}: accepted #{} \"{}\"", id(), env.sequence, env.command);
    // The simulator is owned by this thread; readers see snapshot_.
    sim_.handle(env, [this](const FeedbackEnvelope& fb) {
      {
        std::lock_guard lock(mu_);
        snapshot_ = fb.state_snapshot;
      }
      outbox_->send(encode_feedback(fb));
    });
  }
}

}  // namespace swarmchat
