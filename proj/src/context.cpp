#include "swarmchat/context.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <set>

namespace swarmchat {

double jaccard(const KeywordSet& a, const KeywordSet& b) {
  if (a.empty() && b.empty()) throw Error(ErrorCode::UndefinedSimilarity, "both token sets are empty");
  std::size_t common = 0;
  for (const auto& t : a) common += b.contains(t) ? 1 : 0;
  const std::size_t all = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(all);
}

double scale_similarity(double j) {
  if (!(j >= 0.0 && j <= 1.0)) throw Error(ErrorCode::InvalidRatio, std::to_string(j));
  return 0.6 + 0.4 * j;
}

TextSimilarity::TextSimilarity(SimilarityConfig config) : config_(std::move(config)) {}

bool TextSimilarity::is_stopword(std::string_view token) const {
  return std::find(config_.stopwords.begin(), config_.stopwords.end(), token) != config_.stopwords.end();
}

KeywordSet TextSimilarity::content_tokens(const KeywordSet& raw) const {
  KeywordSet out;
  for (const auto& t : raw)
    if (!is_stopword(t)) out.insert(t);
  return out;
}

bool TextSimilarity::synonym_hit(std::string_view token, const KeywordSet& other_raw) const {
  for (const auto& [lhs, rhs] : config_.synonyms) {
    if (lhs == token && other_raw.contains(rhs)) return true;
    if (rhs == token && other_raw.contains(lhs)) return true;
  }
  return false;
}

double TextSimilarity::ratio(const KeywordSet& raw_a, const KeywordSet& raw_b) const {
  const auto a = content_tokens(raw_a);
  const auto b = content_tokens(raw_b);
  if (!config_.synonyms_enabled) return jaccard(a, b);
  if (a.empty() && b.empty()) throw Error(ErrorCode::UndefinedSimilarity, "both token sets are empty");

  double common = 0.0;
  std::size_t exact = 0;
  for (const auto& t : a) {
    if (b.contains(t)) {
      ++exact;
    } else if (synonym_hit(t, raw_b)) {
      common += config_.synonym_weight;
    }
  }
  for (const auto& t : b)
    if (!a.contains(t) && synonym_hit(t, raw_a)) common += config_.synonym_weight;
  common += static_cast<double>(exact);
  const double all = static_cast<double>(a.size() + b.size() - exact);
  return std::min(1.0, common / all);
}

std::string_view strip_enrichment(std::string_view command_text) {
  auto pos = command_text.find(" [from ");
  return pos == std::string_view::npos ? command_text : command_text.substr(0, pos);
}

double alignment(const TextSimilarity& sim, std::string_view context_text, std::string_view command_text) {
  return sim.ratio(split_tokens(strip_enrichment(context_text)), split_tokens(strip_enrichment(command_text)));
}

namespace {

std::string fill(std::string pattern, std::string_view key, std::string_view value) {
  for (auto pos = pattern.find(key); pos != std::string::npos; pos = pattern.find(key, pos + value.size()))
    pattern.replace(pos, key.size(), value);
  return pattern;
}

std::string phrase(const std::string& pattern, std::string_view action, std::string_view direction,
                   std::string_view task) {
  auto out = fill(fill(fill(pattern, "{action}", action), "{direction}", direction), "{task}", task);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::string first_of(const KeywordSet& keywords, const std::vector<std::string>& cls, const std::string& fallback) {
  for (const auto& t : keywords)
    if (std::find(cls.begin(), cls.end(), t) != cls.end()) return t;
  return fallback;
}

}  // namespace

std::array<std::string, 4> template_contexts(const KeywordSet& keywords, const TemplateTables& tables) {
  const auto action = first_of(keywords, tables.actions, tables.default_action);
  const auto direction = first_of(keywords, tables.directions, tables.default_direction);
  const auto task = first_of(keywords, tables.tasks, "");

  std::vector<std::string> others;
  for (const auto& d : tables.alternate_directions)
    if (d != direction && others.size() < 2) others.push_back(d);
  while (others.size() < 2) others.push_back(direction);

  if (task.empty()) {
    return {phrase(tables.no_task_first, action, direction, ""), phrase(tables.no_task_combo, action, direction, ""),
            phrase(tables.no_task_combo, action, others[0], ""), phrase(tables.no_task_combo, action, others[1], "")};
  }
  auto it = tables.task_phrases.find(task);
  const std::string solo = it != tables.task_phrases.end() ? it->second : "{task}";
  return {phrase(solo, action, direction, task), phrase(tables.task_combo, action, direction, task),
          phrase(tables.task_combo, action, others[0], task), phrase(tables.task_combo, action, others[1], task)};
}

namespace {

bool usable(const std::vector<std::string>& texts) {
  if (texts.size() != 4) return false;
  std::set<std::string> seen;
  for (const auto& t : texts) {
    if (split_tokens(t).empty() || !seen.insert(t).second) return false;
  }
  return true;
}

}  // namespace

std::vector<CandidateContext> generate_contexts(const KeywordSet& keywords, const ContextProvider& provider,
                                                const TemplateTables& tables, const TextSimilarity& sim) {
  if (keywords.empty()) throw Error(ErrorCode::EmptyKeywords, "no keywords");

  std::vector<std::string> texts;
  if (provider.mode == ProviderMode::External && provider.fetch) {
    texts = provider.fetch(keywords);
    if (!usable(texts)) {
      spdlog::warn("ExternalProviderUnavailable: falling back to template contexts");
      texts.clear();
    }
  }
  if (texts.empty()) {
    auto fixed = template_contexts(keywords, tables);
    texts.assign(fixed.begin(), fixed.end());
  }

  std::vector<CandidateContext> out;
  out.reserve(4);
  for (int i = 0; i < 4; ++i) {
    CandidateContext c;
    c.index = i + 1;
    c.text = texts[static_cast<std::size_t>(i)];
    c.token_set = sim.content_tokens(split_tokens(c.text));
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CandidateContext> score_contexts(const KeywordSet& keywords, std::vector<CandidateContext> contexts,
                                             const TextSimilarity& sim) {
  for (auto& c : contexts) {
    try {
      c.jaccard = sim.ratio(split_tokens(c.text), keywords);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UndefinedSimilarity) throw;
      spdlog::info("candidate {} has no content tokens; scored as no overlap", c.index);
      c.jaccard = 0.0;
    }
    c.score = scale_similarity(c.jaccard);
  }
  std::stable_sort(contexts.begin(), contexts.end(), [](const auto& l, const auto& r) {
    if (l.score != r.score) return l.score > r.score;
    return l.index < r.index;
  });
  return contexts;
}

}  // namespace swarmchat
