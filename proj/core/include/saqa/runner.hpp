#pragma once

#include <functional>
#include <string>
#include <vector>

#include "saqa/eval.hpp"
#include "saqa/llm_client.hpp"
#include "saqa/qa.hpp"

namespace saqa {

enum class AnswerMode { Oracle, Llm };

struct RunnerOptions {
  AnswerMode mode = AnswerMode::Oracle;
  LlmEndpointConfig endpoint;
  Tolerances tol;
  SignConvention convention = SignConvention::PositiveLeft;
  double comparable_margin = 0.05;
  double frame_period_s = 0.1;
  ExtractOptions extract;
};

struct RunnerFailure {
  std::string clip_id;
  std::size_t index = 0;
  std::string message;
};

struct RunnerStats {
  std::size_t total_items = 0;
  std::size_t already_answered = 0;  // journal hits skipped on resume
  std::size_t answered_now = 0;
  std::size_t unparseable_now = 0;
  std::vector<RunnerFailure> failures;  // not journaled; a rerun retries them
};

// Answers every item not yet present in the journal and appends one record
// per item, keyed by (clip_id, per-clip index). Oracle mode is sequential
// and deterministic; LLM mode runs at most endpoint.max_parallel requests in
// flight. Endpoint failures are reported in stats and left out of the
// journal so a rerun picks them up; unparseable responses are journaled.
RunnerStats run_answers(
    const std::vector<QAItem>& items,
    const std::function<const SceneMetadata*(const std::string& clip_id)>& scene_lookup,
    const std::string& journal_path, const RunnerOptions& options);

}  // namespace saqa
