#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "swarmchat/analytics.hpp"

using namespace swarmchat;
using swarmchat::testing::TempDir;

namespace {

InteractionRecord make_record(std::uint64_t seq, const std::string& context, double base, Modality suggested,
                              Modality selected, std::optional<char> key = std::nullopt) {
  InteractionRecord rec;
  rec.sequence = seq;
  rec.keywords = tokenize(context);
  rec.selected_context = context;
  rec.top_context = context;
  rec.final_command = context + " [from (0.00,0.00); battery 100%]";
  rec.base_score = base;
  rec.modality.suggested = suggested;
  resolve_modality(rec.modality, selected);
  rec.teleop_key = key;
  rec.robot_id = "TurtleBot 1";
  return rec;
}

}  // namespace

TEST(Bonus, Examples) {
  TextSimilarity sim;
  auto tp = make_record(1, "go patrol the area", 1.0, Modality::Text, Modality::Text);
  EXPECT_DOUBLE_EQ(compute_bonus(ModuleId::TP, tp, sim), 0.1);

  auto ir = make_record(2, "move forward", 0.8, Modality::Text, Modality::Text);
  EXPECT_DOUBLE_EQ(compute_bonus(ModuleId::IR, ir, sim), 0.0);
  auto ir_patrol = make_record(3, "patrol area", 1.0, Modality::Text, Modality::Text);
  EXPECT_DOUBLE_EQ(compute_bonus(ModuleId::IR, ir_patrol, sim), 0.15);

  auto ms = make_record(4, "speak", 0.7, Modality::Voice, Modality::Text);
  EXPECT_DOUBLE_EQ(compute_bonus(ModuleId::MS, ms, sim), -0.05);
  auto ms_ok = make_record(5, "speak", 0.7, Modality::Voice, Modality::Voice);
  EXPECT_DOUBLE_EQ(compute_bonus(ModuleId::MS, ms_ok, sim), 0.1);

  auto cg = make_record(6, "Patrol the area", 1.0, Modality::Teleop, Modality::Teleop);
  EXPECT_DOUBLE_EQ(compute_bonus(ModuleId::CG, cg, sim), 0.1);
}

TEST(Blend, Examples) {
  EXPECT_DOUBLE_EQ(blend_score(1.0, 0.15, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(blend_score(0.6, 0.0, 0.6), 0.6);
  EXPECT_DOUBLE_EQ(blend_score(0.6, -0.05, 0.8), 0.675);
  EXPECT_DOUBLE_EQ(blend_score(0.0, -0.5, 0.0), 0.0);
}

TEST(UpdateWeight, Examples) {
  ModuleLearningState s;
  s.weight = 0.8;
  s.learning_rate = 0.1;
  auto next = update_weight(s, 1.0);
  EXPECT_NEAR(next.weight, 0.82, 1e-15);
  ASSERT_EQ(next.score_history.size(), 1u);
  EXPECT_EQ(next.score_history.back(), 1.0);
  EXPECT_EQ(update_weight(s, 0.8).weight, 0.8);
}

TEST(Satisfaction, ScenarioExamples) {
  EXPECT_EQ(classify_satisfaction(make_record(1, "Patrol area", 1.0, Modality::Teleop, Modality::Teleop, 'P')).level,
            SatisfactionLevel::VeryHigh);
  auto high = classify_satisfaction(make_record(2, "Patrol perimeter", 1.0, Modality::Text, Modality::Text));
  EXPECT_EQ(high.level, SatisfactionLevel::High);
  EXPECT_EQ(high.criteria_count, 2);
  EXPECT_EQ(classify_satisfaction(make_record(3, "run right", 0.6, Modality::Voice, Modality::Voice)).level,
            SatisfactionLevel::Medium);
  EXPECT_EQ(classify_satisfaction(make_record(4, "run right", 0.6, Modality::Text, Modality::Voice)).level,
            SatisfactionLevel::Low);
  EXPECT_EQ(to_string(SatisfactionLevel::VeryHigh), "Very High");
}

TEST(Record, CodecRoundTrip) {
  auto rec = make_record(9, "Patrol zone", 0.9, Modality::Teleop, Modality::Teleop, 'F');
  rec.custom = true;
  rec.comment = "good";
  rec.timestamp = 1234;
  auto back = decode_record(encode_record(rec));
  EXPECT_EQ(encode_record(back), encode_record(rec));
  EXPECT_EQ(back.teleop_key, std::optional<char>('F'));
  EXPECT_EQ(back.comment, std::optional<std::string>("good"));
}

TEST(LearningGraph, FirstInteractionUsesInitialWeight) {
  LearningGraph graph;
  auto snap = graph.snapshot();
  EXPECT_EQ(snap.interactions(), 0u);
  for (auto m : kModules) {
    EXPECT_DOUBLE_EQ(snap.module(m).weight, 0.8);
    EXPECT_TRUE(snap.module(m).score_history.empty());
  }
  for (auto c : snap.modality_counts) EXPECT_EQ(c, 0u);

  auto rec = make_record(1, "patrol area", 1.0, Modality::Teleop, Modality::Teleop, 'P');
  auto out = graph.record_interaction(rec).snapshot;
  TextSimilarity sim;
  for (auto m : kModules) {
    double bonus = compute_bonus(m, rec, sim);
    double s = blend_score(1.0, bonus, 0.8);
    ASSERT_EQ(out.module(m).score_history.size(), 1u);
    EXPECT_DOUBLE_EQ(out.module(m).score_history[0], s);
    EXPECT_DOUBLE_EQ(out.module(m).weight, 0.8 + 0.1 * (s - 0.8));
  }
}

TEST(LearningGraph, ModalityCountsAndHistories) {
  LearningGraph graph;
  graph.record_interaction(make_record(1, "patrol area", 1.0, Modality::Teleop, Modality::Teleop, 'P'));
  graph.record_interaction(make_record(2, "patrol zone", 1.0, Modality::Teleop, Modality::Teleop, 'F'));
  graph.record_interaction(make_record(3, "patrol", 1.0, Modality::Teleop, Modality::Teleop, 'L'));
  auto snap = graph.record_interaction(make_record(4, "run right", 0.6, Modality::Voice, Modality::Voice)).snapshot;
  EXPECT_EQ(snap.count(Modality::Teleop), 3u);
  EXPECT_EQ(snap.count(Modality::Voice), 1u);
  EXPECT_EQ(snap.count(Modality::Text), 0u);
  for (auto m : kModules) {
    EXPECT_EQ(snap.module(m).score_history.size(), 4u);
    EXPECT_EQ(snap.module(m).evaluation_history.size(), 4u);
  }
  std::size_t tally = 0;
  for (auto t : snap.satisfaction_tally) tally += t;
  EXPECT_EQ(tally, 4u);
}

TEST(LearningGraph, CommentsLastWriteWinsEmptyIsNoop) {
  LearningGraph graph;
  graph.record_interaction(make_record(7, "run right", 0.6, Modality::Voice, Modality::Voice));
  EXPECT_TRUE(graph.attach_comment(7, "good"));
  EXPECT_EQ(graph.snapshot().records[0].comment, std::optional<std::string>("good"));
  graph.attach_comment(7, "");
  EXPECT_EQ(graph.snapshot().records[0].comment, std::optional<std::string>("good"));
  graph.attach_comment(7, "better");
  EXPECT_EQ(graph.snapshot().records[0].comment, std::optional<std::string>("better"));
  EXPECT_FALSE(graph.attach_comment(99, "nobody"));
}

TEST(LearningGraph, ReplaysLogOnRestart) {
  TempDir dir;
  auto log = dir.path() / "interactions.jsonl";
  AnalyticsSnapshot before;
  {
    LearningGraph graph(LearningConfig{}, TextSimilarity{}, log);
    graph.record_interaction(make_record(1, "patrol area", 1.0, Modality::Teleop, Modality::Teleop, 'P'));
    graph.record_interaction(make_record(2, "run right", 0.6, Modality::Voice, Modality::Voice));
    graph.attach_comment(2, "good");
    before = graph.snapshot();
  }
  LearningGraph again(LearningConfig{}, TextSimilarity{}, log);
  auto after = again.snapshot();
  ASSERT_EQ(after.interactions(), 2u);
  EXPECT_EQ(after.records[1].comment, std::optional<std::string>("good"));
  for (auto m : kModules) {
    EXPECT_EQ(after.module(m).weight, before.module(m).weight);
    EXPECT_EQ(after.module(m).score_history, before.module(m).score_history);
  }
  EXPECT_EQ(after.modality_counts, before.modality_counts);
}

TEST(LearningGraph, UnwritableLogWarnsButKeepsState) {
  LearningGraph graph(LearningConfig{}, TextSimilarity{}, "/proc/definitely/not/writable.jsonl");
  auto out = graph.record_interaction(make_record(1, "patrol", 1.0, Modality::Teleop, Modality::Teleop, 'P'));
  EXPECT_TRUE(out.warning.has_value());
  EXPECT_EQ(out.snapshot.interactions(), 1u);
}
