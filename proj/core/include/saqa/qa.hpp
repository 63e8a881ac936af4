#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "saqa/motion.hpp"
#include "saqa/tracks.hpp"

namespace saqa {

enum class Category { DoATrajectory, DistanceDynamics, CrossSource, DistVsDoA };

// Machine-readable names: "doa_trajectory", "distance_dynamics",
// "cross_source", "dist_vs_doa".
std::string category_name(Category category);
std::optional<Category> category_from_name(const std::string& name);

// Slot bindings recovered from (or used to render) a question template.
// Not serialized: the benchmark file carries only the published schema, and
// these are re-derived by template recognition.
struct QuerySlots {
  std::string label;    // subject track ({label} / {a})
  std::string label_b;  // comparison track ({b})
  std::vector<DoABucket> from_region;
  std::vector<DoABucket> to_region;
  std::optional<CompareAspect> aspect;
  int template_id = -1;
};

struct QAItem {
  std::string clip_id;
  std::string type;  // "mcq-single" | "boolean"
  std::string prompt;
  std::vector<std::string> choices;  // empty for boolean
  std::string answer;
  std::string scoring;  // "choice_match" | "exact"

  // Recognition metadata (in-memory only).
  std::optional<Category> category;
  QuerySlots slots;

  bool is_mcq() const { return type == "mcq-single"; }
};

struct GenOptions {
  std::set<Category> categories = {Category::DoATrajectory, Category::DistanceDynamics,
                                   Category::CrossSource, Category::DistVsDoA};
  int per_category = 1;
  Tolerances tol;
  double comparable_margin = 0.05;
  SignConvention convention = SignConvention::PositiveLeft;
  std::uint64_t seed = 0;
};

struct GenResult {
  std::vector<QAItem> items;
  std::vector<std::string> skips;  // one reason per skipped category slot
};

// Deterministic question generation: template and slot selection are a pure
// function of (clip_id, seed); every stored answer is computed through the
// motion-analysis oracle, never hand-written. Unsatisfiable categories are
// skipped with a reason, not an error.
GenResult generate_qa(const SceneMetadata& scene, const GenOptions& options);

// JSON array whose elements carry keys exactly clip_id, type, prompt,
// choices (omitted for boolean), answer, scoring, in that order.
std::string serialize_benchmark(const std::vector<QAItem>& items);

// Strict inverse: malformed JSON, schema violations and unknown keys are
// validation errors naming the element index. Recognized prompts get their
// category and slots restored.
std::vector<QAItem> parse_benchmark(const std::string& text);

// Fills item.category and item.slots by matching the prompt against the
// template registry. Returns false when no template matches.
bool recognize_item(QAItem& item);

// Recomputes an item's answer against a scene through the motion-analysis
// oracle. Empty optional (with a diagnostic) when the question cannot be
// answered: unrecognized template, label missing or ambiguous in the scene,
// or a computed answer that is not among the item's choices.
std::optional<std::string> compute_answer(const SceneMetadata& scene, const QAItem& item,
                                          const Tolerances& tol, double comparable_margin,
                                          SignConvention convention,
                                          std::string* diagnostic = nullptr);

}  // namespace saqa
