#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "swarmchat/analytics.hpp"
#include "swarmchat/bus.hpp"
#include "swarmchat/config.hpp"
#include "swarmchat/context.hpp"
#include "swarmchat/decision.hpp"
#include "swarmchat/domain.hpp"

namespace swarmchat {

/// Milliseconds source. Injected so scenario replays are reproducible.
using Clock = std::function<std::int64_t()>;

std::int64_t wall_clock_ms();

/// Clock that only moves when told to.
class ManualClock {
 public:
  explicit ManualClock(std::int64_t start = 0) : now_(start) {}
  void set(std::int64_t ms) noexcept { now_ = ms; }
  std::int64_t now() const noexcept { return now_; }
  Clock clock() {
    return [this] { return now_.load(); };
  }

 private:
  std::atomic<std::int64_t> now_;
};

/// Speech-to-text hook for the Voice modality. The default passes the
/// transcript through unchanged.
class SpeechToText {
 public:
  virtual ~SpeechToText() = default;
  virtual std::string transcribe(const std::string& input) = 0;
};

class PassThroughSpeech final : public SpeechToText {
 public:
  std::string transcribe(const std::string& input) override { return input; }
};

enum class SessionStatus { Drafting, Suggested, Dispatched, Acknowledged };

std::string_view to_string(SessionStatus s) noexcept;

struct ScoredCandidate {
  CandidateContext context;
  ModalitySuggestion suggestion;
};

struct SubmitResult {
  std::string session_id;
  KeywordSet keywords;
  std::vector<ScoredCandidate> candidates;  // best first
  IntentLabel intent = IntentLabel::GeneralOperation;
};

struct DispatchRequest {
  std::optional<int> index;                 // generation index of a candidate, 1..4
  std::optional<std::string> custom_text;   // operator-written command
  std::optional<std::string> transcript;    // Voice input, passed through speech-to-text
  Modality modality = Modality::Text;
  std::string robot_id;
  std::optional<char> teleop_key;
  std::optional<std::string> comment;
};

struct DispatchResult {
  CommandEnvelope envelope;
  PlannedCommand plan;
  ModalitySuggestion suggestion;
  Satisfaction satisfaction;
  InteractionRecord record;
  std::vector<std::string> warnings;
};

struct SessionView {
  std::string id;
  SessionStatus status = SessionStatus::Drafting;
  KeywordSet keywords;
  std::vector<ScoredCandidate> candidates;
  IntentLabel intent = IntentLabel::GeneralOperation;
  std::string selected_text;
  std::optional<ModalitySuggestion> modality;
  std::string target;
  std::optional<std::uint64_t> last_sequence;
};

struct OrchestratorOptions {
  Config config;
  BusEndpoint broker;
  std::filesystem::path data_dir;  // empty: nothing persisted
  Clock clock;                     // defaults to wall clock
  ContextProvider provider;
  std::shared_ptr<SpeechToText> speech;
};

/// Runs keywords -> contexts -> intent -> plan -> modality -> envelope,
/// publishes on the command topic, and folds robot feedback back into the
/// logs, sessions and the event stream.
class Orchestrator {
 public:
  explicit Orchestrator(OrchestratorOptions options);
  ~Orchestrator();
  Orchestrator(const Orchestrator&) = delete;
  Orchestrator& operator=(const Orchestrator&) = delete;

  /// Connects to the broker and starts the feedback listener.
  void start();
  void stop();

  std::string create_session();
  SubmitResult submit_keywords(const std::string& session_id, std::string_view text);
  DispatchResult dispatch(const std::string& session_id, const DispatchRequest& request);
  /// Attaches a comment to the session's last dispatched interaction.
  void submit_comment(const std::string& session_id, const std::string& text);

  SessionView session(const std::string& session_id) const;
  std::vector<CommandEnvelope> published_log() const;
  std::map<std::string, std::vector<CommandEnvelope>> received_log() const;
  AnalyticsSnapshot analytics() const;
  std::map<std::string, RobotState> robot_states() const;
  std::vector<FeedbackEnvelope> feedback_for(std::uint64_t sequence) const;

  /// Blocks until a Completed or Failed feedback for `sequence` arrives.
  std::optional<FeedbackEnvelope> wait_for_terminal(std::uint64_t sequence, std::chrono::milliseconds timeout);

  /// Live JSON events: session, dispatch, feedback, analytics.
  std::shared_ptr<Subscription> subscribe_events();

  const Config& config() const noexcept { return options_.config; }
  const TextSimilarity& similarity() const noexcept { return sim_; }
  std::int64_t now() const { return options_.clock(); }

 private:
  struct Session;
  struct RobotEntry {
    RobotState state;
    std::int64_t updated_at = 0;
  };

  std::shared_ptr<Session> find_session(const std::string& id) const;
  void feedback_loop();
  void on_feedback(const FeedbackEnvelope& fb);
  void emit_event(const std::string& json);
  void load_logs();

  OrchestratorOptions options_;
  TextSimilarity sim_;
  LearningGraph graph_;
  SequenceCounter sequence_;
  BusClient bus_;
  std::shared_ptr<Subscription> feedback_;
  std::thread feedback_thread_;
  std::atomic<bool> running_{false};

  mutable std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;

  mutable std::mutex state_mu_;  // logs, robots, feedback index
  std::condition_variable feedback_cv_;
  std::vector<CommandEnvelope> published_;
  std::map<std::uint64_t, std::size_t> published_index_;
  std::map<std::uint64_t, std::string> session_of_sequence_;
  std::map<std::string, std::vector<CommandEnvelope>> received_;
  std::map<std::uint64_t, std::vector<FeedbackEnvelope>> feedback_index_;
  std::map<std::string, RobotEntry> robots_;
  std::ofstream published_file_;
  std::ofstream received_file_;

  std::mutex events_mu_;
  std::vector<std::shared_ptr<Subscription>> event_subscribers_;
};

}  // namespace swarmchat
