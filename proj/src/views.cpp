#include "swarmchat/views.hpp"

#include "json_util.hpp"

namespace swarmchat::views {

json candidate(const ScoredCandidate& c) {
  json j;
  j["index"] = c.context.index;
  j["text"] = c.context.text;
  j["tokens"] = c.context.token_set.tokens();
  j["jaccard"] = c.context.jaccard;
  j["score"] = c.context.score;
  j["suggested_modality"] = std::string(to_string(c.suggestion.suggested));
  j["reason"] = std::string(to_string(c.suggestion.reason));
  return j;
}

json submit(const SubmitResult& r) {
  json j;
  j["session_id"] = r.session_id;
  j["keywords"] = r.keywords.tokens();
  j["intent"] = std::string(to_string(r.intent));
  j["intent_message"] = std::string(display_string(r.intent));
  json cands = json::array();
  for (const auto& c : r.candidates) cands.push_back(candidate(c));
  j["candidates"] = std::move(cands);
  return j;
}

json suggestion(const ModalitySuggestion& s) {
  json j;
  j["suggested"] = std::string(to_string(s.suggested));
  j["reason"] = std::string(to_string(s.reason));
  j["selected"] = std::string(to_string(s.user_selected));
  j["overridden"] = s.overridden;
  return j;
}

json envelope(const CommandEnvelope& env) { return detail::envelope_to_json(env); }

json dispatch(const DispatchResult& r) {
  json j;
  j["envelope"] = envelope(r.envelope);
  j["base_context"] = r.plan.base_context;
  j["base_score"] = r.record.base_score;
  j["modality"] = suggestion(r.suggestion);
  j["satisfaction"] = std::string(to_string(r.satisfaction.level));
  j["criteria_count"] = r.satisfaction.criteria_count;
  j["warnings"] = r.warnings;
  return j;
}

json session(const SessionView& s) {
  json j;
  j["session_id"] = s.id;
  j["status"] = std::string(to_string(s.status));
  j["keywords"] = s.keywords.tokens();
  j["intent"] = std::string(to_string(s.intent));
  json cands = json::array();
  for (const auto& c : s.candidates) cands.push_back(candidate(c));
  j["candidates"] = std::move(cands);
  j["selected_text"] = s.selected_text;
  j["modality"] = s.modality ? suggestion(*s.modality) : json();
  j["target"] = s.target;
  j["last_sequence"] = s.last_sequence ? json(*s.last_sequence) : json();
  return j;
}

json robot_state(const RobotState& s) { return detail::state_to_json(s); }

json feedback(const FeedbackEnvelope& fb) { return json::parse(encode_feedback(fb)); }

json record(const InteractionRecord& rec) { return json::parse(encode_record(rec)); }

json analytics(const AnalyticsSnapshot& snap, bool include_records) {
  json j;
  json modules = json::object();
  for (const auto& m : snap.modules) {
    json mj;
    mj["weight"] = m.weight;
    mj["learning_rate"] = m.learning_rate;
    mj["latest_score"] = m.score_history.empty() ? json() : json(m.score_history.back());
    mj["score_history"] = m.score_history;
    mj["evaluation_history"] = m.evaluation_history;
    modules[std::string(to_string(m.module))] = std::move(mj);
  }
  j["interactions"] = snap.interactions();
  j["modules"] = std::move(modules);
  json counts = json::object();
  for (auto m : {Modality::Text, Modality::Voice, Modality::Teleop}) counts[std::string(to_string(m))] = snap.count(m);
  j["modality_counts"] = std::move(counts);
  json tally = json::object();
  for (auto s : {SatisfactionLevel::VeryHigh, SatisfactionLevel::High, SatisfactionLevel::Medium,
                 SatisfactionLevel::Low})
    tally[std::string(to_string(s))] = snap.satisfaction_tally[static_cast<std::size_t>(s)];
  j["satisfaction"] = std::move(tally);
  if (include_records) {
    json recs = json::array();
    for (const auto& r : snap.records) recs.push_back(record(r));
    j["records"] = std::move(recs);
  }
  return j;
}

}  // namespace swarmchat::views
