#include <gtest/gtest.h>
#include <httplib.h>

#include <algorithm>
#include <set>

#include "swarmchat/context.hpp"

using namespace swarmchat;

namespace {

// Plain std::set arithmetic with its own stopword list.
double oracle_score(const std::set<std::string>& keywords, const std::set<std::string>& candidate_words) {
  static const std::set<std::string> stop{"the", "and", "a",  "an", "to",   "area",   "of",
                                          "in",  "on",  "at", "for", "with", "please", "then"};
  std::set<std::string> k, c, both, either;
  for (const auto& w : keywords)
    if (!stop.count(w)) k.insert(w);
  for (const auto& w : candidate_words)
    if (!stop.count(w)) c.insert(w);
  std::set_intersection(k.begin(), k.end(), c.begin(), c.end(), std::inserter(both, both.end()));
  std::set_union(k.begin(), k.end(), c.begin(), c.end(), std::inserter(either, either.end()));
  double j = either.empty() ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(either.size());
  return 0.6 + 0.4 * j;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ScenarioError;
}

}  // namespace

TEST(Jaccard, Examples) {
  EXPECT_DOUBLE_EQ(jaccard({"patrol", "area"}, {"patrol", "area"}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard({"patrol"}, {"move"}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard({"move", "forward", "patrol"}, {"move", "patrol"}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(jaccard({}, {"move"}), 0.0);
  EXPECT_EQ(code_of([] { jaccard({}, {}); }), ErrorCode::UndefinedSimilarity);
}

TEST(Jaccard, SymmetricAndExtremal) {
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
  for (unsigned ma = 0; ma < 32; ++ma)
    for (unsigned mb = 0; mb < 32; ++mb) {
      if (!ma && !mb) continue;
      KeywordSet a, b;
      for (unsigned i = 0; i < 5; ++i) {
        if (ma >> i & 1) a.insert(vocab[i]);
        if (mb >> i & 1) b.insert(vocab[i]);
      }
      EXPECT_EQ(jaccard(a, b), jaccard(b, a));
      EXPECT_EQ(jaccard(a, b) == 1.0, ma == mb);
      EXPECT_EQ(jaccard(a, b) == 0.0, (ma & mb) == 0);
    }
}

TEST(ScaleSimilarity, EndpointsAndMonotone) {
  EXPECT_DOUBLE_EQ(scale_similarity(1.0), 1.0);
  EXPECT_DOUBLE_EQ(scale_similarity(0.0), 0.6);
  EXPECT_NEAR(scale_similarity(2.0 / 3.0), 0.8667, 1e-4);
  double prev = scale_similarity(0.0);
  for (int i = 1; i <= 100; ++i) {
    double cur = scale_similarity(i / 100.0);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
  EXPECT_EQ(code_of([] { scale_similarity(1.01); }), ErrorCode::InvalidRatio);
  EXPECT_EQ(code_of([] { scale_similarity(-0.01); }), ErrorCode::InvalidRatio);
}

TEST(Templates, GoldenStrings) {
  TemplateTables tables;
  auto go = template_contexts(KeywordSet{"go"}, tables);
  EXPECT_EQ(go, (std::array<std::string, 4>{"Go to the target area", "Go forward", "Go left", "Go right"}));

  auto mfp = template_contexts(KeywordSet{"move", "forward", "patrol"}, tables);
  EXPECT_EQ(mfp, (std::array<std::string, 4>{"Patrol the area", "Move forward and patrol", "Move left and patrol",
                                             "Move right and patrol"}));
}

TEST(Templates, SingleTaskKeywordGivesFourDistinctPatrolPhrasings) {
  auto texts = template_contexts(KeywordSet{"patrol"}, TemplateTables{});
  std::set<std::string> distinct(texts.begin(), texts.end());
  EXPECT_EQ(distinct.size(), 4u);
  for (const auto& t : texts) EXPECT_TRUE(split_tokens(t).contains("patrol")) << t;
}

TEST(Templates, AlwaysFourDistinct) {
  const std::vector<std::string> vocab{"move", "go", "run", "execute", "forward", "backward", "left",
                                       "right", "patrol", "search", "return", "speak", "dance", "zone"};
  for (unsigned mask = 1; mask < (1u << vocab.size()); mask += 37) {
    KeywordSet k;
    for (std::size_t i = 0; i < vocab.size(); ++i)
      if (mask >> i & 1) k.insert(vocab[i]);
    auto texts = template_contexts(k, TemplateTables{});
    std::set<std::string> distinct(texts.begin(), texts.end());
    EXPECT_EQ(distinct.size(), 4u) << k.join();
  }
}

TEST(Templates, GenerationIsPure) {
  TextSimilarity sim;
  KeywordSet k{"run", "left", "search"};
  auto first = generate_contexts(k, ContextProvider{}, TemplateTables{}, sim);
  for (int i = 0; i < 20; ++i) {
    auto again = generate_contexts(k, ContextProvider{}, TemplateTables{}, sim);
    ASSERT_EQ(again.size(), 4u);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(again[c].text, first[c].text);
  }
}

TEST(ScoreContexts, Examples) {
  TextSimilarity sim;
  auto score_of = [&](const KeywordSet& k, const std::string& text) {
    std::vector<CandidateContext> cs(4);
    cs[0].text = text;
    for (int i = 0; i < 4; ++i) cs[i].index = i + 1;
    cs[1].text = "alpha";
    cs[2].text = "beta";
    cs[3].text = "gamma";
    for (auto& c : cs) c.token_set = sim.content_tokens(split_tokens(c.text));
    auto scored = score_contexts(k, cs, sim);
    for (const auto& c : scored)
      if (c.index == 1) return c.score;
    return -1.0;
  };
  EXPECT_DOUBLE_EQ(score_of({"patrol", "area"}, "patrol area"), 1.0);
  EXPECT_DOUBLE_EQ(score_of({"patrol", "area"}, "dance now"), 0.6);
  EXPECT_DOUBLE_EQ(score_of({"move", "forward", "patrol"}, "Move forward and patrol"),
                   oracle_score({"move", "forward", "patrol"}, {"move", "forward", "and", "patrol"}));
}

TEST(ScoreContexts, SortedDescendingTiesByIndex) {
  TextSimilarity sim;
  KeywordSet k{"move", "forward", "patrol"};
  auto scored = score_contexts(k, generate_contexts(k, {}, TemplateTables{}, sim), sim);
  ASSERT_EQ(scored.size(), 4u);
  for (std::size_t i = 1; i < scored.size(); ++i) {
    EXPECT_GE(scored[i - 1].score, scored[i].score);
    if (scored[i - 1].score == scored[i].score) EXPECT_LT(scored[i - 1].index, scored[i].index);
  }
  for (const auto& c : scored) {
    EXPECT_GE(c.score, 0.6);
    EXPECT_LE(c.score, 1.0);
  }
  EXPECT_EQ(scored.front().text, "Move forward and patrol");
}

TEST(TextSimilarity, SynonymPartialCredit) {
  SimilarityConfig off;
  SimilarityConfig on;
  on.synonyms_enabled = true;
  KeywordSet context = split_tokens("Patrol the area");
  KeywordSet command = split_tokens("Patrol zone");
  EXPECT_DOUBLE_EQ(TextSimilarity(off).ratio(context, command), 0.5);
  EXPECT_DOUBLE_EQ(TextSimilarity(on).ratio(context, command), 0.75);
  EXPECT_DOUBLE_EQ(scale_similarity(TextSimilarity(on).ratio(context, command)), 0.9);
}

TEST(Alignment, StripsEnrichment) {
  TextSimilarity sim;
  EXPECT_EQ(strip_enrichment("Patrol area [from (0.00,0.00); battery 100%] P"), "Patrol area");
  EXPECT_DOUBLE_EQ(alignment(sim, "patrol area", "patrol area [from (1.00,2.00); battery 55%]"), 1.0);
  EXPECT_DOUBLE_EQ(alignment(sim, "Patrol the area", "Patrol the area"), 1.0);
  EXPECT_DOUBLE_EQ(alignment(sim, "patrol", "run right"), 0.0);
  // Without stripping, the battery token counts against the match.
  EXPECT_NEAR(jaccard({"patrol", "area"}, {"patrol", "area", "battery"}), 2.0 / 3.0, 1e-15);
}

class ExternalProviderTest : public ::testing::Test {
 protected:
  void SetUp() override {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  ContextProvider provider(int timeout_ms = 2000) {
    ExternalProviderConfig cfg;
    cfg.url = "http://127.0.0.1:" + std::to_string(port_) + "/contexts";
    cfg.timeout_ms = timeout_ms;
    return ContextProvider{ProviderMode::External, make_http_fetch(cfg)};
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(ExternalProviderTest, UsesProviderTexts) {
  std::string seen;
  server_.Post("/contexts", [&](const httplib::Request& req, httplib::Response& res) {
    seen = req.body;
    res.set_content(R"({"contexts":["Sweep the hall","Guard the door","Circle the yard","Hold position"]})",
                    "application/json");
  });
  TextSimilarity sim;
  auto cs = generate_contexts(KeywordSet{"patrol", "hall"}, provider(), TemplateTables{}, sim);
  EXPECT_EQ(seen, R"({"keywords":["patrol","hall"]})");
  ASSERT_EQ(cs.size(), 4u);
  EXPECT_EQ(cs[0].text, "Sweep the hall");
  EXPECT_EQ(cs[3].text, "Hold position");
  EXPECT_EQ(cs[3].index, 4);
}

TEST_F(ExternalProviderTest, FallsBackOnBadBody) {
  server_.Post("/contexts", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"contexts":["one","one","two","three"]})", "application/json");
  });
  TextSimilarity sim;
  auto cs = generate_contexts(KeywordSet{"go"}, provider(), TemplateTables{}, sim);
  EXPECT_EQ(cs[0].text, "Go to the target area");
}

TEST_F(ExternalProviderTest, FallsBackOnServerError) {
  server_.Post("/contexts", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  TextSimilarity sim;
  auto cs = generate_contexts(KeywordSet{"go"}, provider(), TemplateTables{}, sim);
  EXPECT_EQ(cs[1].text, "Go forward");
}

TEST_F(ExternalProviderTest, FallsBackOnTimeout) {
  server_.Post("/contexts", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"contexts":["a","b","c","d"]})", "application/json");
  });
  TextSimilarity sim;
  auto start = std::chrono::steady_clock::now();
  auto cs = generate_contexts(KeywordSet{"go"}, provider(200), TemplateTables{}, sim);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(590));
  EXPECT_EQ(cs[0].text, "Go to the target area");
}

TEST(ExternalProvider, UnreachableFallsBack) {
  ExternalProviderConfig cfg;
  cfg.url = "http://127.0.0.1:1/contexts";
  cfg.timeout_ms = 300;
  TextSimilarity sim;
  auto cs = generate_contexts(KeywordSet{"go"}, ContextProvider{ProviderMode::External, make_http_fetch(cfg)},
                              TemplateTables{}, sim);
  EXPECT_EQ(cs[0].text, "Go to the target area");
}
