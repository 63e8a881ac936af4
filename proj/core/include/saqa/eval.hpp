#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saqa/qa.hpp"

namespace saqa {

inline constexpr const char* kSystemPromptVersion = "saqa-system-prompt/v1";
inline constexpr const char* kExtractionRulesVersion = "last-match-extraction/v1";

// Rule-based oracle answer. Never guesses: foreign templates, missing or
// ambiguous labels produce answered = false with a diagnostic.
struct RuleAnswer {
  bool answered = false;
  std::string text;
  std::string diagnostic;
};

RuleAnswer rule_answer(const SceneMetadata& scene, const QAItem& item, const Tolerances& tol,
                       SignConvention convention = SignConvention::PositiveLeft,
                       double comparable_margin = 0.05);

struct PromptPair {
  std::string system_text;
  std::string user_text;
};

// System text states the DoA and distance semantics (including the sign
// convention in force), time units and the required output format; user text
// is the structured-attribute JSON followed by the question and, for MCQ,
// lettered choices. Byte-stable for fixed inputs.
PromptPair build_llm_prompt(const SceneMetadata& scene, const QAItem& item,
                            SignConvention convention = SignConvention::PositiveLeft,
                            double frame_period_s = 0.1, const Tolerances& tol = {});

struct ExtractOptions {
  // Text between these markers (reasoning traces) is excluded before
  // scanning; an unclosed opener discards everything after it.
  std::string reasoning_open = "<think>";
  std::string reasoning_close = "</think>";
};

// Scans for the final explicit answer: last standalone yes/no for boolean
// items; last occurrence of a choice string (case- and punctuation-
// insensitive) or its letter tag for MCQ. Returns the canonical answer text,
// or nullopt when nothing matches (unparseable).
std::optional<std::string> extract_answer(const std::string& raw, const QAItem& item,
                                          const ExtractOptions& options = {});

struct AnswerRecord {
  std::string clip_id;
  std::size_t index = 0;  // position of the item within its clip
  std::string raw_response;
  std::string extracted_answer;
  bool unparseable = false;
  double latency_s = 0.0;
  std::string answered_by;  // "oracle" | "llm"
};

std::string answer_record_json(const AnswerRecord& record);
AnswerRecord answer_record_from_json(const std::string& line);

// Newline-delimited JSON journal. A missing file reads as empty; malformed
// lines are validation errors naming the line number.
std::vector<AnswerRecord> read_journal(const std::string& path);

struct CategoryCount {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const {
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
};

struct EvalReport {
  std::map<std::string, CategoryCount> per_category;
  std::map<std::string, CategoryCount> per_type;
  CategoryCount overall;
  std::size_t unparseable_count = 0;
  std::size_t answered = 0;  // items with a journal record
  std::string sign_convention;
};

// Exact scoring is case-insensitive trimmed equality; choice_match resolves
// to the same comparison after extraction has normalized letter tags to
// choice text. Unparseable records and missing records count as incorrect.
// Misaligned answers (unknown key or duplicate key) are validation errors.
EvalReport score(const std::vector<QAItem>& items, const std::vector<AnswerRecord>& answers);

std::string report_json(const EvalReport& report);

// Aligned text table, columns DoA | DistDyn | CrossSrc | Dist vs DoA |
// Overall, percentages with one decimal; a second block breaks accuracy down
// by question type.
std::string report_table(const EvalReport& report);

}  // namespace saqa
