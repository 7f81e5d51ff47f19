#pragma once

// JSON views served by the HTTP API and the event stream.

#include <json.hpp>

#include "swarmchat/analytics.hpp"
#include "swarmchat/orchestrator.hpp"

namespace swarmchat::views {

using json = nlohmann::ordered_json;

json candidate(const ScoredCandidate& c);
json submit(const SubmitResult& r);
json suggestion(const ModalitySuggestion& s);
json dispatch(const DispatchResult& r);
json session(const SessionView& s);
json robot_state(const RobotState& s);
json feedback(const FeedbackEnvelope& fb);
json envelope(const CommandEnvelope& env);
json record(const InteractionRecord& rec);

/// Current weights, per-module score series (blended and report scores),
/// modality histogram and satisfaction tally.
json analytics(const AnalyticsSnapshot& snap, bool include_records = true);

}  // namespace swarmchat::views
