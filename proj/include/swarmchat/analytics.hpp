#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmchat/config.hpp"
#include "swarmchat/context.hpp"
#include "swarmchat/decision.hpp"
#include "swarmchat/domain.hpp"

namespace swarmchat {

/// Task Planner, Intent Recognition, Modality Selection, Context Generator.
enum class ModuleId { TP, IR, MS, CG };

inline constexpr std::array<ModuleId, 4> kModules{ModuleId::TP, ModuleId::IR, ModuleId::MS, ModuleId::CG};

std::string_view to_string(ModuleId m) noexcept;

struct InteractionRecord {
  std::uint64_t sequence = 0;
  KeywordSet keywords;
  std::string selected_context;  // context text before enrichment
  std::string top_context;       // best-scoring generated candidate at dispatch time
  bool custom = false;
  std::string final_command;  // published command text
  double base_score = 0.6;
  ModalitySuggestion modality;
  std::optional<char> teleop_key;
  std::optional<std::string> comment;
  std::string robot_id;
  std::int64_t timestamp = 0;
};

std::string encode_record(const InteractionRecord& rec);
InteractionRecord decode_record(std::string_view line);

struct ModuleLearningState {
  ModuleId module = ModuleId::TP;
  double weight = 0.8;
  double learning_rate = 0.1;
  std::vector<double> score_history;       // blended S per interaction
  std::vector<double> evaluation_history;  // per-interaction module score for the report
};

enum class SatisfactionLevel { Low, Medium, High, VeryHigh };

std::string_view to_string(SatisfactionLevel s) noexcept;

struct Satisfaction {
  SatisfactionLevel level = SatisfactionLevel::Low;
  int criteria_count = 0;
};

/// Context generator alignment term: jaccard over stopword-free,
/// enrichment-free tokens.
double command_alignment(const TextSimilarity& sim, std::string_view context, std::string_view command);

double compute_bonus(ModuleId module, const InteractionRecord& rec, const TextSimilarity& sim);

/// clamp((B + bonus + w) / 2, 0, 1)
double blend_score(double base, double bonus, double weight);

/// w <- clamp(w + eta (S - w), 0, 1); S is appended to the history.
ModuleLearningState update_weight(ModuleLearningState state, double score);

/// Counts (score >= 0.85, suggestion accepted, Teleop confirmed by key).
Satisfaction classify_satisfaction(const InteractionRecord& rec);

/// Per-module score shown in the scenario report:
///   TP, IR  base score of the dispatched context
///   MS      mean of base score and acceptance (1.0 accepted, 0.6 overridden)
///   CG      scaled similarity between the top generated candidate and the
///           dispatched context
double evaluation_score(ModuleId module, const InteractionRecord& rec, const TextSimilarity& sim);

struct AnalyticsSnapshot {
  std::array<ModuleLearningState, 4> modules;
  std::array<std::size_t, 3> modality_counts{};      // indexed by Modality
  std::array<std::size_t, 4> satisfaction_tally{};   // indexed by SatisfactionLevel
  std::vector<InteractionRecord> records;

  std::size_t interactions() const noexcept { return records.size(); }
  std::size_t count(Modality m) const noexcept { return modality_counts[static_cast<std::size_t>(m)]; }
  const ModuleLearningState& module(ModuleId m) const noexcept { return modules[static_cast<std::size_t>(m)]; }
};

/// Serialized owner of the per-module learning state. One writer at a time;
/// readers receive copies.
class LearningGraph {
 public:
  struct Outcome {
    AnalyticsSnapshot snapshot;
    std::optional<std::string> warning;
  };

  /// An existing log at `log_path` is replayed to rebuild the state.
  explicit LearningGraph(LearningConfig config = {}, TextSimilarity sim = TextSimilarity{},
                         std::filesystem::path log_path = {});

  Outcome record_interaction(InteractionRecord rec);

  /// Empty text is a no-op; a later comment replaces an earlier one.
  /// Returns false when no record carries that sequence.
  bool attach_comment(std::uint64_t sequence, const std::string& text);

  AnalyticsSnapshot snapshot() const;

 private:
  void apply(InteractionRecord rec);
  bool apply_comment(std::uint64_t sequence, const std::string& text);
  std::optional<std::string> persist(const std::string& line);

  LearningConfig config_;
  TextSimilarity sim_;
  std::filesystem::path log_path_;
  std::ofstream log_;
  mutable std::mutex mu_;
  AnalyticsSnapshot state_;
};

}  // namespace swarmchat
