#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmchat/config.hpp"
#include "swarmchat/domain.hpp"

namespace swarmchat {

struct CandidateContext {
  int index = 0;  // 1..4, generation order
  std::string text;
  KeywordSet token_set;  // content tokens of text (stopwords removed)
  double jaccard = 0.0;
  double score = 0.6;
};

/// |a ∩ b| / |a ∪ b|. Throws UndefinedSimilarity when both are empty.
double jaccard(const KeywordSet& a, const KeywordSet& b);

/// 0.6 + 0.4 j. Throws InvalidRatio outside [0, 1].
double scale_similarity(double j);

/// Stopword removal and the set similarity used for both context scoring
/// and context/command alignment.
class TextSimilarity {
 public:
  explicit TextSimilarity(SimilarityConfig config = {});

  bool is_stopword(std::string_view token) const;
  KeywordSet content_tokens(const KeywordSet& raw) const;

  /// Jaccard over stopword-free tokens. With synonyms enabled, a token on
  /// one side whose synonym appears among the other side's raw tokens adds
  /// synonym_weight to the intersection. Throws UndefinedSimilarity when
  /// both content sets are empty.
  double ratio(const KeywordSet& raw_a, const KeywordSet& raw_b) const;

  const SimilarityConfig& config() const noexcept { return config_; }

 private:
  bool synonym_hit(std::string_view token, const KeywordSet& other_raw) const;

  SimilarityConfig config_;
};

/// Drops the planner's " [from (x,y); battery N%]" suffix and anything after it.
std::string_view strip_enrichment(std::string_view command_text);

/// Jaccard of the stopword- and enrichment-stripped token sets.
double alignment(const TextSimilarity& sim, std::string_view context_text, std::string_view command_text);

enum class ProviderMode { Template, External };

/// Fetches four context strings from an external generator. Returns an
/// empty vector on any failure.
using ExternalFetch = std::function<std::vector<std::string>(const KeywordSet&)>;

/// HTTP client for the external generator: POST {"keywords":[...]} and
/// expect {"contexts":[4 strings]}.
ExternalFetch make_http_fetch(ExternalProviderConfig config);

struct ContextProvider {
  ProviderMode mode = ProviderMode::Template;
  ExternalFetch fetch;  // used when mode == External
};

/// Deterministic four-way phrasing from the template tables.
std::array<std::string, 4> template_contexts(const KeywordSet& keywords, const TemplateTables& tables);

/// Four unscored candidates, indices 1..4. External mode falls back to the
/// templates when the provider fails or returns anything but four distinct
/// nonempty strings.
std::vector<CandidateContext> generate_contexts(const KeywordSet& keywords, const ContextProvider& provider,
                                                const TemplateTables& tables, const TextSimilarity& sim);

/// Fills jaccard/score and sorts by score descending, index ascending.
std::vector<CandidateContext> score_contexts(const KeywordSet& keywords, std::vector<CandidateContext> contexts,
                                             const TextSimilarity& sim);

}  // namespace swarmchat
