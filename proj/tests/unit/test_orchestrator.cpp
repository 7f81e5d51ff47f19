#include <gtest/gtest.h>
#include <httplib.h>

#include <sstream>

#include "support.hpp"
#include "swarmchat/api.hpp"
#include "swarmchat/scenario.hpp"
#include "swarmchat/stack.hpp"

using namespace swarmchat;
using namespace std::chrono_literals;
using swarmchat::testing::TempDir;
using json = nlohmann::json;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ScenarioError;
}

class StackTest : public ::testing::Test {
 protected:
  void start(std::filesystem::path data_dir = {}) {
    StackOptions opts;
    opts.data_dir = std::move(data_dir);
    opts.clock = clock_.clock();
    stack_ = std::make_unique<LocalStack>(std::move(opts));
    stack_->start();
  }
  void SetUp() override { start(); }
  Orchestrator& orch() { return stack_->orchestrator(); }

  ManualClock clock_{1000};
  std::unique_ptr<LocalStack> stack_;
};

}  // namespace

TEST_F(StackTest, SubmitKeywords) {
  auto s = orch().create_session();
  auto r = orch().submit_keywords(s, "move forward patrol");
  ASSERT_EQ(r.candidates.size(), 4u);
  for (const auto& c : r.candidates) {
    EXPECT_GE(c.context.score, 0.6);
    EXPECT_LE(c.context.score, 1.0);
    EXPECT_EQ(c.suggestion.suggested, suggest_modality(c.context.text, c.context.score).suggested);
  }
  EXPECT_EQ(display_string(r.intent), "Patrol mode activated.");
  EXPECT_EQ(orch().session(s).status, SessionStatus::Suggested);

  EXPECT_EQ(orch().submit_keywords(s, "go").intent, IntentLabel::NavigationMode);
  EXPECT_EQ(code_of([&] { orch().submit_keywords(s, ""); }), ErrorCode::EmptyKeywords);
  EXPECT_EQ(code_of([&] { orch().submit_keywords("nope", "go"); }), ErrorCode::UnknownSession);
}

TEST_F(StackTest, DispatchCandidateTeleop) {
  auto s = orch().create_session();
  auto r = orch().submit_keywords(s, "patrol area");
  DispatchRequest req;
  req.index = 1;
  req.modality = Modality::Teleop;
  req.teleop_key = 'P';
  req.robot_id = "TurtleBot 1";
  auto d = orch().dispatch(s, req);
  EXPECT_EQ(d.envelope.target, "TurtleBot 1");
  EXPECT_EQ(d.envelope.command, "Patrol the area [from (0.00,0.00); battery 100%] P");
  EXPECT_EQ(d.satisfaction.level, SatisfactionLevel::VeryHigh);
  EXPECT_EQ(orch().published_log().size(), 1u);

  auto terminal = orch().wait_for_terminal(d.envelope.sequence, 5s);
  ASSERT_TRUE(terminal);
  EXPECT_EQ(terminal->status, FeedbackStatus::Completed);
  EXPECT_EQ(orch().session(s).status, SessionStatus::Acknowledged);
  auto fbs = orch().feedback_for(d.envelope.sequence);
  ASSERT_EQ(fbs.size(), 3u);
  EXPECT_EQ(fbs[0].status, FeedbackStatus::Received);
  EXPECT_EQ(fbs[1].status, FeedbackStatus::Executing);
  EXPECT_EQ(orch().received_log().at("TurtleBot 1").at(0), d.envelope);
}

TEST_F(StackTest, DispatchCustomVoiceWithComment) {
  auto s = orch().create_session();
  orch().submit_keywords(s, "patrol area");
  DispatchRequest req;
  req.custom_text = "run right";
  req.modality = Modality::Voice;
  req.robot_id = "TurtleBot 3";
  req.comment = "good";
  auto d = orch().dispatch(s, req);
  EXPECT_EQ(d.satisfaction.level, SatisfactionLevel::Medium);
  EXPECT_EQ(d.envelope.modality, Modality::Voice);
  auto snap = orch().analytics();
  ASSERT_EQ(snap.interactions(), 1u);
  EXPECT_EQ(snap.records[0].comment, std::optional<std::string>("good"));
  EXPECT_TRUE(snap.records[0].custom);
}

TEST_F(StackTest, VoiceTranscriptGoesThroughSpeechHook) {
  auto s = orch().create_session();
  orch().submit_keywords(s, "go left");
  DispatchRequest req;
  req.transcript = "turn left please";
  req.modality = Modality::Voice;
  req.robot_id = "TurtleBot 2";
  auto d = orch().dispatch(s, req);
  EXPECT_EQ(strip_enrichment(d.envelope.command), "turn left please");
}

TEST_F(StackTest, DispatchErrors) {
  auto s = orch().create_session();
  DispatchRequest req;
  req.index = 1;
  req.robot_id = "TurtleBot 1";
  EXPECT_EQ(code_of([&] { orch().dispatch(s, req); }), ErrorCode::InvalidState);

  orch().submit_keywords(s, "patrol area");
  req.robot_id = "TurtleBot 9";
  EXPECT_EQ(code_of([&] { orch().dispatch(s, req); }), ErrorCode::UnknownRobot);
  req.robot_id = "TurtleBot 1";
  req.modality = Modality::Teleop;
  EXPECT_EQ(code_of([&] { orch().dispatch(s, req); }), ErrorCode::MissingTeleopKey);
  req.index = 7;
  req.teleop_key = 'P';
  EXPECT_EQ(code_of([&] { orch().dispatch(s, req); }), ErrorCode::InvalidState);
  EXPECT_TRUE(orch().published_log().empty());
  EXPECT_EQ(orch().analytics().interactions(), 0u);
  EXPECT_EQ(orch().session(s).status, SessionStatus::Suggested);
}

TEST_F(StackTest, CommentSemantics) {
  auto s = orch().create_session();
  EXPECT_EQ(code_of([&] { orch().submit_comment(s, "early"); }), ErrorCode::InvalidState);
  orch().submit_keywords(s, "patrol perimeter");
  DispatchRequest req;
  req.custom_text = "Patrol perimeter";
  req.robot_id = "TurtleBot 1";
  orch().dispatch(s, req);
  orch().submit_comment(s, "good");
  orch().submit_comment(s, "");
  EXPECT_EQ(orch().analytics().records[0].comment, std::optional<std::string>("good"));
  orch().submit_comment(s, "fine");
  EXPECT_EQ(orch().analytics().records[0].comment, std::optional<std::string>("fine"));
}

TEST_F(StackTest, NewKeywordsReenterDrafting) {
  auto s = orch().create_session();
  orch().submit_keywords(s, "go");
  DispatchRequest req;
  req.index = 2;
  req.robot_id = "TurtleBot 2";
  auto d = orch().dispatch(s, req);
  orch().wait_for_terminal(d.envelope.sequence, 5s);
  EXPECT_EQ(code_of([&] { orch().dispatch(s, req); }), ErrorCode::InvalidState);
  orch().submit_keywords(s, "go");
  EXPECT_EQ(orch().dispatch(s, req).envelope.sequence, d.envelope.sequence + 1);
}

TEST_F(StackTest, EventsCarryDispatchAndFeedback) {
  auto events = orch().subscribe_events();
  auto s = orch().create_session();
  orch().submit_keywords(s, "go");
  DispatchRequest req;
  req.index = 2;
  req.robot_id = "TurtleBot 2";
  auto d = orch().dispatch(s, req);
  orch().wait_for_terminal(d.envelope.sequence, 5s);
  std::vector<std::string> types;
  while (auto e = events->next(200ms)) types.push_back(json::parse(*e).at("type").get<std::string>());
  ASSERT_GE(types.size(), 6u) << ::testing::PrintToString(types);
  EXPECT_EQ(types[0], "session");
  EXPECT_EQ(std::count(types.begin(), types.end(), "dispatch"), 1);
  EXPECT_EQ(std::count(types.begin(), types.end(), "analytics"), 1);
  EXPECT_EQ(std::count(types.begin(), types.end(), "feedback"), 3);
}

TEST(Orchestrator, LogsSurviveRestart) {
  TempDir dir;
  ManualClock clock(5000);
  std::vector<CommandEnvelope> published;
  {
    StackOptions opts;
    opts.data_dir = dir.path();
    opts.clock = clock.clock();
    LocalStack stack(std::move(opts));
    stack.start();
    auto& o = stack.orchestrator();
    auto s = o.create_session();
    o.submit_keywords(s, "patrol area");
    DispatchRequest req;
    req.index = 1;
    req.robot_id = "TurtleBot 1";
    auto d = o.dispatch(s, req);
    ASSERT_TRUE(o.wait_for_terminal(d.envelope.sequence, 5s));
    published = o.published_log();
  }
  StackOptions opts;
  opts.data_dir = dir.path();
  opts.clock = clock.clock();
  LocalStack stack(std::move(opts));
  stack.start();
  auto& o = stack.orchestrator();
  EXPECT_EQ(o.published_log(), published);
  EXPECT_EQ(o.received_log().at("TurtleBot 1"), published);
  EXPECT_EQ(o.analytics().interactions(), 1u);
  auto s = o.create_session();
  o.submit_keywords(s, "go");
  DispatchRequest req;
  req.index = 1;
  req.robot_id = "TurtleBot 2";
  EXPECT_EQ(o.dispatch(s, req).envelope.sequence, 2u);
}

TEST(Scenario, ParseFormat) {
  std::istringstream in(R"(# comment

{"keywords": "patrol area", "selection": 1, "modality": "Teleop", "key": "P", "robot": "TurtleBot 1"}
{"keywords": "patrol area", "selection": "run right", "modality": "Voice", "robot": "TurtleBot 3", "comment": "good"}
{"keywords": "go", "transcript": "go left", "modality": "Voice", "robot": "TurtleBot 2"}
)");
  auto steps = parse_scenario(in);
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[0].index, 1);
  EXPECT_EQ(steps[0].key, 'P');
  EXPECT_EQ(steps[0].line, 3);
  EXPECT_EQ(steps[1].custom, std::optional<std::string>("run right"));
  EXPECT_EQ(steps[1].comment, std::optional<std::string>("good"));
  EXPECT_EQ(steps[2].transcript, std::optional<std::string>("go left"));
}

TEST(Scenario, ParseErrorsNameTheLine) {
  for (const char* bad : {R"({"keywords": "go", "modality": "Text"})",
                          R"({"keywords": "go", "selection": 1, "modality": "Gesture", "robot": "r"})",
                          R"({"keywords": "go", "selection": 1, "modality": "Teleop", "key": "PF", "robot": "r"})",
                          "not json"}) {
    std::istringstream in(std::string("\n") + bad + "\n");
    try {
      parse_scenario(in);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ScenarioError);
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST_F(StackTest, EmptyScenarioGivesEmptyReport) {
  auto report = run_scenario(orch(), {});
  EXPECT_FALSE(report.error);
  EXPECT_TRUE(report.rows.empty());
}

TEST_F(StackTest, UnknownRobotStopsAtStep) {
  std::istringstream in(R"({"keywords": "go", "selection": 1, "modality": "Text", "robot": "TurtleBot 1"}
{"keywords": "go", "selection": 1, "modality": "Text", "robot": "TurtleBot 9"}
{"keywords": "go", "selection": 1, "modality": "Text", "robot": "TurtleBot 2"})");
  auto report = run_scenario(orch(), parse_scenario(in));
  ASSERT_TRUE(report.error);
  EXPECT_EQ(report.error->rfind("step 2: UnknownRobot", 0), 0u) << *report.error;
  EXPECT_EQ(report.steps.size(), 1u);
  EXPECT_EQ(report.rows.size(), 4u);
}

TEST(Report, TableLayout) {
  ReportRow r;
  r.module = ModuleId::MS;
  r.step = 1;
  r.context = "run right";
  r.score = 0.8;
  r.suggested = Modality::Voice;
  r.user = "Voice";
  r.satisfaction = SatisfactionLevel::Medium;
  r.decision = "Text";
  r.comment = "good";
  auto table = render_table({r});
  EXPECT_NE(table.find("LLM | Context   | Score | Sug."), std::string::npos) << table;
  EXPECT_NE(table.find("MS  | run right | 0.80  | Voice | Voice | Medium | Text     | good"), std::string::npos)
      << table;
}

class ApiTest : public StackTest {
 protected:
  void SetUp() override {
    StackTest::SetUp();
    api_ = std::make_unique<ApiServer>(orch());
    port_ = api_->start("127.0.0.1", 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { api_->stop(); }

  json post(const std::string& path, const json& body, int expect) {
    auto res = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
    return json::parse(res->body);
  }
  json get(const std::string& path) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, 200) << path;
    return json::parse(res->body);
  }

  std::unique_ptr<ApiServer> api_;
  std::unique_ptr<httplib::Client> client_;
  std::uint16_t port_ = 0;
};

TEST_F(ApiTest, FullFlow) {
  auto sid = post("/sessions", json::object(), 201).at("session_id").get<std::string>();
  auto submit = post("/sessions/" + sid + "/keywords", {{"text", "patrol area"}}, 200);
  EXPECT_EQ(submit["intent_message"], "Patrol mode activated.");
  ASSERT_EQ(submit["candidates"].size(), 4u);
  EXPECT_EQ(submit["candidates"][0]["text"], "Patrol the area");
  EXPECT_EQ(submit["candidates"][0]["score"], 1.0);
  EXPECT_EQ(submit["candidates"][0]["suggested_modality"], "Teleop");

  auto d = post("/sessions/" + sid + "/dispatch",
                {{"index", 1}, {"modality", "Teleop"}, {"key", "P"}, {"robot", "TurtleBot 1"}}, 200);
  EXPECT_EQ(d["envelope"]["target"], "TurtleBot 1");
  EXPECT_EQ(d["satisfaction"], "Very High");
  EXPECT_EQ(d["modality"]["overridden"], false);
  ASSERT_TRUE(orch().wait_for_terminal(d["envelope"]["sequence"].get<std::uint64_t>(), 5s));

  post("/sessions/" + sid + "/comment", {{"text", "good"}}, 200);
  EXPECT_EQ(get("/sessions/" + sid)["status"], "Acknowledged");

  auto raw = client_->Get("/logs/published");
  ASSERT_TRUE(raw);
  EXPECT_EQ(raw->body, "[" + encode_envelope(orch().published_log()[0]) + "]");
  EXPECT_EQ(get("/logs/received")["TurtleBot 1"].size(), 1u);

  auto analytics = get("/analytics");
  EXPECT_EQ(analytics["interactions"], 1);
  EXPECT_EQ(analytics["modality_counts"]["Teleop"], 1);
  EXPECT_EQ(analytics["modules"]["MS"]["evaluation_history"][0], 1.0);
  EXPECT_EQ(analytics["records"][0]["comment"], "good");
  EXPECT_EQ(get("/robots").size(), 3u);
}

TEST_F(ApiTest, ErrorStatuses) {
  auto sid = post("/sessions", json::object(), 201).at("session_id").get<std::string>();
  EXPECT_EQ(post("/sessions/" + sid + "/keywords", {{"text", ""}}, 422)["error"], "EmptyKeywords");
  EXPECT_EQ(post("/sessions/nope/keywords", {{"text", "go"}}, 404)["error"], "UnknownSession");
  post("/sessions/" + sid + "/keywords", {{"text", "go"}}, 200);
  EXPECT_EQ(post("/sessions/" + sid + "/dispatch", {{"index", 1}, {"modality", "Teleop"}, {"robot", "TurtleBot 1"}},
                 422)["error"],
            "MissingTeleopKey");
  EXPECT_EQ(post("/sessions/" + sid + "/dispatch", {{"index", 1}, {"modality", "Text"}, {"robot", "TurtleBot 9"}},
                 422)["error"],
            "UnknownRobot");
  EXPECT_EQ(post("/sessions/" + sid + "/dispatch", {{"index", 1}, {"modality", "Gesture"}, {"robot", "TurtleBot 1"}},
                 422)["error"],
            "BadModality");
  auto res = client_->Post("/sessions/" + sid + "/keywords", "{oops", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(ApiTest, EventStream) {
  std::mutex mu;
  std::string received;
  std::atomic<bool> done{false};
  auto snapshot = [&] {
    std::lock_guard lock(mu);
    return received;
  };
  std::thread reader([&] {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(5s);
    c.Get("/events", [&](const char* data, std::size_t len) {
      std::lock_guard lock(mu);
      received.append(data, len);
      return !done.load();
    });
  });
  // The first keepalive shows the stream is attached.
  for (int i = 0; i < 100 && snapshot().empty(); ++i) std::this_thread::sleep_for(20ms);
  auto sid = post("/sessions", json::object(), 201).at("session_id").get<std::string>();
  post("/sessions/" + sid + "/keywords", {{"text", "go"}}, 200);
  auto d = post("/sessions/" + sid + "/dispatch", {{"index", 1}, {"modality", "Text"}, {"robot", "TurtleBot 2"}}, 200);
  orch().wait_for_terminal(d["envelope"]["sequence"].get<std::uint64_t>(), 5s);
  std::this_thread::sleep_for(300ms);
  done = true;
  api_->stop();
  reader.join();
  const auto text = snapshot();
  EXPECT_NE(text.find("data: {\"type\":\"session\""), std::string::npos);
  EXPECT_NE(text.find("data: {\"type\":\"dispatch\""), std::string::npos);
  EXPECT_NE(text.find("\"type\":\"feedback\""), std::string::npos);
}
