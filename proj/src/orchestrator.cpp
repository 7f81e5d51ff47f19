#include "swarmchat/orchestrator.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "json_util.hpp"
#include "swarmchat/views.hpp"

namespace swarmchat {

std::int64_t wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string_view to_string(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::Drafting: return "Drafting";
    case SessionStatus::Suggested: return "Suggested";
    case SessionStatus::Dispatched: return "Dispatched";
    case SessionStatus::Acknowledged: return "Acknowledged";
  }
  return "Drafting";
}

struct Orchestrator::Session {
  std::mutex mu;
  SessionView view;
};

Orchestrator::Orchestrator(OrchestratorOptions options)
    : options_(std::move(options)),
      sim_(options_.config.similarity),
      graph_(options_.config.learning, sim_,
             options_.data_dir.empty() ? std::filesystem::path{} : options_.data_dir / "interactions.jsonl") {
  if (!options_.clock) options_.clock = wall_clock_ms;
  if (!options_.speech) options_.speech = std::make_shared<PassThroughSpeech>();
  if (options_.provider.mode == ProviderMode::External && !options_.provider.fetch)
    options_.provider.fetch = make_http_fetch(options_.config.external);

  const auto now = options_.clock();
  for (const auto& r : options_.config.robots)
    robots_[r.id] = RobotEntry{normalized(RobotState{r.id, r.start, r.battery, "idle"}), now};
  load_logs();
}

Orchestrator::~Orchestrator() { stop(); }

void Orchestrator::load_logs() {
  if (options_.data_dir.empty()) return;
  std::filesystem::create_directories(options_.data_dir);
  const auto published_path = options_.data_dir / "published.jsonl";
  const auto received_path = options_.data_dir / "received.jsonl";

  auto each_line = [](const std::filesystem::path& path, auto&& fn) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        fn(decode_envelope(line));
      } catch (const Error& e) {
        spdlog::warn("{}: skipping unreadable line ({})", path.string(), e.what());
      }
    }
  };
  each_line(published_path, [&](CommandEnvelope env) {
    sequence_.advance_past(env.sequence);
    published_index_[env.sequence] = published_.size();
    published_.push_back(std::move(env));
  });
  each_line(received_path, [&](CommandEnvelope env) { received_[env.target].push_back(std::move(env)); });

  published_file_.open(published_path, std::ios::app);
  received_file_.open(received_path, std::ios::app);
  if (!published_file_ || !received_file_) spdlog::warn("cannot open command logs in {}", options_.data_dir.string());
}

void Orchestrator::start() {
  if (running_) return;
  bus_.connect(options_.broker);
  feedback_ = bus_.subscribe(kFeedbackTopic);
  running_ = true;
  feedback_thread_ = std::thread([this] { feedback_loop(); });
}

void Orchestrator::stop() {
  if (!running_.exchange(false)) return;
  if (feedback_thread_.joinable()) feedback_thread_.join();
  bus_.close();
  std::lock_guard lock(events_mu_);
  for (auto& s : event_subscribers_) s->close();
  event_subscribers_.clear();
}

std::string Orchestrator::create_session() {
  std::lock_guard lock(sessions_mu_);
  auto id = "s" + std::to_string(next_session_++);
  auto session = std::make_shared<Session>();
  session->view.id = id;
  sessions_[id] = session;
  return id;
}

std::shared_ptr<Orchestrator::Session> Orchestrator::find_session(const std::string& id) const {
  std::lock_guard lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, id);
  return it->second;
}

SessionView Orchestrator::session(const std::string& session_id) const {
  auto s = find_session(session_id);
  std::lock_guard lock(s->mu);
  return s->view;
}

SubmitResult Orchestrator::submit_keywords(const std::string& session_id, std::string_view text) {
  auto session = find_session(session_id);
  auto keywords = tokenize(text);

  auto contexts = generate_contexts(keywords, options_.provider, options_.config.templates, sim_);
  contexts = score_contexts(keywords, std::move(contexts), sim_);

  SubmitResult result;
  result.session_id = session_id;
  result.keywords = keywords;
  result.intent = recognize_intent(keywords);
  for (auto& c : contexts) {
    auto suggestion = suggest_modality(c.text, c.score);
    result.candidates.push_back({std::move(c), suggestion});
  }

  {
    std::lock_guard lock(session->mu);
    auto& v = session->view;
    v.status = SessionStatus::Drafting;
    v.keywords = keywords;
    v.candidates = result.candidates;
    v.intent = result.intent;
    v.selected_text.clear();
    v.modality.reset();
    v.target.clear();
    v.status = SessionStatus::Suggested;
  }

  views::json ev;
  ev["type"] = "session";
  ev["data"] = views::submit(result);
  emit_event(detail::dump(ev));
  return result;
}

DispatchResult Orchestrator::dispatch(const std::string& session_id, const DispatchRequest& request) {
  auto session = find_session(session_id);
  std::lock_guard session_lock(session->mu);
  auto& view = session->view;
  if (view.status != SessionStatus::Suggested)
    throw Error(ErrorCode::InvalidState, "session " + session_id + " is " + std::string(to_string(view.status)) +
                                             "; submit keywords first");

  std::string text;
  std::string top_context = view.candidates.empty() ? std::string{} : view.candidates.front().context.text;
  double base_score = 0.6;
  ModalitySuggestion suggestion;
  bool custom = false;

  if (request.index) {
    auto it = std::find_if(view.candidates.begin(), view.candidates.end(),
                           [&](const auto& c) { return c.context.index == *request.index; });
    if (it == view.candidates.end())
      throw Error(ErrorCode::InvalidState, "no candidate with index " + std::to_string(*request.index));
    text = it->context.text;
    base_score = it->context.score;
    suggestion = it->suggestion;
  } else {
    if (request.custom_text)
      text = *request.custom_text;
    else if (request.transcript)
      text = options_.speech->transcribe(*request.transcript);
    if (split_tokens(text).empty()) throw Error(ErrorCode::InvalidState, "no context index or custom command given");
    custom = true;
    try {
      base_score = scale_similarity(sim_.ratio(split_tokens(text), view.keywords));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UndefinedSimilarity) throw;
    }
    // A custom command carries the operator's own modality as the suggestion.
    suggestion.suggested = request.modality;
    suggestion.reason = SuggestionReason::Default;
  }

  const auto& fleet = options_.config.robots;
  if (std::none_of(fleet.begin(), fleet.end(), [&](const auto& r) { return r.id == request.robot_id; }))
    throw Error(ErrorCode::UnknownRobot, request.robot_id);
  if (request.modality == Modality::Teleop && !request.teleop_key)
    throw Error(ErrorCode::MissingTeleopKey, "Teleop dispatch needs a key");

  const auto now = options_.clock();
  DispatchResult result;
  {
    std::lock_guard lock(state_mu_);
    const auto& robot = robots_.at(request.robot_id);
    result.plan = plan_task(text, robot.state, now - robot.updated_at, options_.config.planner);
    if (result.plan.stale) {
      auto warning = "StaleState: snapshot for " + request.robot_id + " is " +
                     std::to_string(now - robot.updated_at) + " ms old";
      spdlog::warn("{}", warning);
      result.warnings.push_back(std::move(warning));
    }
    resolve_modality(suggestion, request.modality);
    const auto key = request.modality == Modality::Teleop ? request.teleop_key : std::nullopt;
    result.envelope = package_command(result.plan, request.modality, fleet, sequence_, now, key);

    const auto payload = encode_envelope(result.envelope);
    bus_.publish(kCommandTopic, payload);
    spdlog::info("Published command: {}", payload);
    published_index_[result.envelope.sequence] = published_.size();
    published_.push_back(result.envelope);
    session_of_sequence_[result.envelope.sequence] = session_id;
    if (published_file_.is_open()) published_file_ << payload << '\n' << std::flush;
  }
  result.suggestion = suggestion;

  InteractionRecord rec;
  rec.sequence = result.envelope.sequence;
  rec.keywords = view.keywords;
  rec.selected_context = text;
  rec.top_context = top_context;
  rec.custom = custom;
  rec.final_command = result.envelope.command;
  rec.base_score = base_score;
  rec.modality = suggestion;
  if (request.modality == Modality::Teleop) rec.teleop_key = request.teleop_key;
  rec.robot_id = request.robot_id;
  rec.timestamp = now;
  auto outcome = graph_.record_interaction(rec);
  if (outcome.warning) result.warnings.push_back(*outcome.warning);
  if (request.comment && !request.comment->empty()) {
    graph_.attach_comment(rec.sequence, *request.comment);
    rec.comment = request.comment;
  }
  result.satisfaction = classify_satisfaction(rec);
  result.record = std::move(rec);

  view.selected_text = text;
  view.modality = suggestion;
  view.target = request.robot_id;
  view.last_sequence = result.envelope.sequence;
  view.status = SessionStatus::Dispatched;

  views::json ev;
  ev["type"] = "dispatch";
  ev["session_id"] = session_id;
  ev["data"] = views::dispatch(result);
  emit_event(detail::dump(ev));
  views::json an;
  an["type"] = "analytics";
  an["data"] = views::analytics(outcome.snapshot, false);
  emit_event(detail::dump(an));
  return result;
}

void Orchestrator::submit_comment(const std::string& session_id, const std::string& text) {
  auto session = find_session(session_id);
  std::lock_guard lock(session->mu);
  const auto& v = session->view;
  if (v.status != SessionStatus::Dispatched && v.status != SessionStatus::Acknowledged)
    throw Error(ErrorCode::InvalidState, "nothing dispatched in session " + session_id);
  if (text.empty()) return;
  graph_.attach_comment(*v.last_sequence, text);
}

std::vector<CommandEnvelope> Orchestrator::published_log() const {
  std::lock_guard lock(state_mu_);
  return published_;
}

std::map<std::string, std::vector<CommandEnvelope>> Orchestrator::received_log() const {
  std::lock_guard lock(state_mu_);
  return received_;
}

AnalyticsSnapshot Orchestrator::analytics() const { return graph_.snapshot(); }

std::map<std::string, RobotState> Orchestrator::robot_states() const {
  std::lock_guard lock(state_mu_);
  std::map<std::string, RobotState> out;
  for (const auto& [id, entry] : robots_) out[id] = entry.state;
  return out;
}

std::vector<FeedbackEnvelope> Orchestrator::feedback_for(std::uint64_t sequence) const {
  std::lock_guard lock(state_mu_);
  auto it = feedback_index_.find(sequence);
  return it == feedback_index_.end() ? std::vector<FeedbackEnvelope>{} : it->second;
}

std::optional<FeedbackEnvelope> Orchestrator::wait_for_terminal(std::uint64_t sequence,
                                                                std::chrono::milliseconds timeout) {
  std::unique_lock lock(state_mu_);
  std::optional<FeedbackEnvelope> found;
  feedback_cv_.wait_for(lock, timeout, [&] {
    auto it = feedback_index_.find(sequence);
    if (it == feedback_index_.end()) return false;
    for (const auto& fb : it->second)
      if (is_terminal(fb.status)) {
        found = fb;
        return true;
      }
    return false;
  });
  return found;
}

std::shared_ptr<Subscription> Orchestrator::subscribe_events() {
  auto sub = std::make_shared<Subscription>("events");
  std::lock_guard lock(events_mu_);
  event_subscribers_.push_back(sub);
  return sub;
}

void Orchestrator::emit_event(const std::string& json) {
  std::lock_guard lock(events_mu_);
  std::erase_if(event_subscribers_, [](const auto& s) { return s->closed(); });
  for (auto& s : event_subscribers_) s->push(json);
}

void Orchestrator::feedback_loop() {
  while (running_) {
    auto payload = feedback_->next(std::chrono::milliseconds(50));
    if (!payload) {
      if (feedback_->closed()) {
        spdlog::warn("feedback stream closed");
        return;
      }
      continue;
    }
    try {
      on_feedback(decode_feedback(*payload));
    } catch (const Error& e) {
      spdlog::warn("dropping undecodable feedback ({})", e.what());
    }
  }
}

void Orchestrator::on_feedback(const FeedbackEnvelope& fb) {
  std::optional<std::string> ack_session;
  {
    std::lock_guard lock(state_mu_);
    feedback_index_[fb.command_sequence].push_back(fb);
    robots_[fb.robot_id] = RobotEntry{fb.state_snapshot, options_.clock()};
    if (fb.status == FeedbackStatus::Received) {
      auto it = published_index_.find(fb.command_sequence);
      if (it != published_index_.end() && published_[it->second].target == fb.robot_id) {
        const auto& env = published_[it->second];
        received_[fb.robot_id].push_back(env);
        if (received_file_.is_open()) received_file_ << encode_envelope(env) << '\n' << std::flush;
        if (auto s = session_of_sequence_.find(fb.command_sequence); s != session_of_sequence_.end())
          ack_session = s->second;
      } else {
        spdlog::warn("Received feedback for unknown command #{} from {}", fb.command_sequence, fb.robot_id);
      }
    }
  }
  feedback_cv_.notify_all();

  if (ack_session) {
    try {
      auto session = find_session(*ack_session);
      std::lock_guard lock(session->mu);
      if (session->view.status == SessionStatus::Dispatched && session->view.last_sequence == fb.command_sequence)
        session->view.status = SessionStatus::Acknowledged;
    } catch (const Error&) {
    }
  }

  views::json ev;
  ev["type"] = "feedback";
  ev["data"] = views::feedback(fb);
  emit_event(detail::dump(ev));
}

}  // namespace swarmchat
