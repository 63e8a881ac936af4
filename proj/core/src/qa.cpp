#include "saqa/qa.hpp"

#include <algorithm>
#include <array>
#include <map>

#include <nlohmann/json.hpp>

#include "saqa/common.hpp"
#include "saqa/rng.hpp"

namespace saqa {
namespace {

// ---------------------------------------------------------------------------
// Template registry. Rendering and recognition share these patterns, so a
// serialized benchmark (which carries only the published schema) can be
// answered later by matching prompts back to their category and slots.
// ---------------------------------------------------------------------------

struct TemplateDef {
  Category category;
  bool boolean;
  std::optional<CompareAspect> aspect;
  std::string_view pattern;
};

constexpr std::array<TemplateDef, 15> kTemplates = {{
    // DoA & its trajectory (boolean)
    {Category::DoATrajectory, true, std::nullopt,
     "Did the {label} move noticeably from {from} toward {to} over the course of the clip?"},
    {Category::DoATrajectory, true, std::nullopt,
     "Over the clip, did the {label} shift from {from} to {to}?"},
    {Category::DoATrajectory, true, std::nullopt,
     "Did the sound of the {label} travel from {from} toward {to} during the clip?"},
    // Distance dynamics (MCQ)
    {Category::DistanceDynamics, false, std::nullopt,
     "By the end of the {label} activity, was the source closer, farther, or about the same "
     "distance compared to the start?"},
    {Category::DistanceDynamics, false, std::nullopt,
     "Compared to the start of its activity, did the {label} end up closer, farther, or about "
     "the same distance from the listener?"},
    {Category::DistanceDynamics, false, std::nullopt,
     "How did the distance of the {label} change between the start and the end of its activity: "
     "closer, farther, or about the same?"},
    // Cross-source comparisons (boolean between two named sources)
    {Category::CrossSource, true, CompareAspect::LargestDirectionShift,
     "Did the {label} change its direction more than the {b} did?"},
    {Category::CrossSource, true, CompareAspect::LargestDistanceChange,
     "Did the {label} change its distance more than the {b} did?"},
    {Category::CrossSource, true, CompareAspect::ClosestApproach,
     "Did the {label} come closer to the listener than the {b} did at any point?"},
    // Cross-source comparisons (MCQ over track labels)
    {Category::CrossSource, false, CompareAspect::ClosestApproach,
     "Which sound source came closest to the listener during the clip?"},
    {Category::CrossSource, false, CompareAspect::LargestDirectionShift,
     "Which sound source changed its direction the most over the clip?"},
    {Category::CrossSource, false, CompareAspect::LargestDistanceChange,
     "Which sound source changed its distance the most over the clip?"},
    // Distance vs DoA (MCQ)
    {Category::DistVsDoA, false, std::nullopt,
     "Which aspect changed more over the clip: the direction the {label} came from or its "
     "distance to the listener?"},
    {Category::DistVsDoA, false, std::nullopt,
     "For the {label}, which changed more during the clip: its direction of arrival or its "
     "distance?"},
    {Category::DistVsDoA, false, std::nullopt,
     "Did the direction or the distance of the {label} change more over the course of the clip?"},
}};

struct RegionPhrase {
  std::string_view phrase;
  std::vector<DoABucket> buckets;
};

const std::vector<RegionPhrase>& region_lexicon() {
  static const std::vector<RegionPhrase> lexicon = {
      {"the left side", {DoABucket::FrontLeft, DoABucket::SlightlyLeft}},
      {"the right side", {DoABucket::FrontRight, DoABucket::SlightlyRight}},
      {"the front-left", {DoABucket::FrontLeft}},
      {"the front-right", {DoABucket::FrontRight}},
      {"slightly left", {DoABucket::SlightlyLeft}},
      {"slightly right", {DoABucket::SlightlyRight}},
      {"the front", {DoABucket::Front}},
  };
  return lexicon;
}

const RegionPhrase* find_region_phrase(std::string_view text) {
  for (const auto& entry : region_lexicon()) {
    if (entry.phrase == text) return &entry;
  }
  return nullptr;
}

bool region_contains(const RegionPhrase& phrase, DoABucket bucket) {
  return std::find(phrase.buckets.begin(), phrase.buckets.end(), bucket) != phrase.buckets.end();
}

// Renders a pattern by substituting {label}, {b}, {from}, {to}.
std::string render_pattern(std::string_view pattern, const std::string& label,
                           const std::string& label_b, std::string_view from_phrase,
                           std::string_view to_phrase) {
  std::string out;
  out.reserve(pattern.size() + 32);
  for (std::size_t i = 0; i < pattern.size();) {
    if (pattern[i] == '{') {
      const std::size_t end = pattern.find('}', i);
      const std::string_view name = pattern.substr(i + 1, end - i - 1);
      if (name == "label") out += label;
      else if (name == "b") out += label_b;
      else if (name == "from") out += from_phrase;
      else if (name == "to") out += to_phrase;
      i = end + 1;
    } else {
      out.push_back(pattern[i++]);
    }
  }
  return out;
}

// Matches a prompt against a pattern: literal segments must occur in order
// (lazy slot extraction between them), anchored at both ends.
bool match_pattern(std::string_view pattern, std::string_view text,
                   std::map<std::string, std::string>& slots) {
  std::size_t pi = 0, ti = 0;
  while (pi < pattern.size()) {
    if (pattern[pi] == '{') {
      const std::size_t brace_end = pattern.find('}', pi);
      const std::string name(pattern.substr(pi + 1, brace_end - pi - 1));
      pi = brace_end + 1;
      // Literal following the slot (up to the next slot or pattern end).
      std::size_t lit_end = pattern.find('{', pi);
      if (lit_end == std::string_view::npos) lit_end = pattern.size();
      const std::string_view literal = pattern.substr(pi, lit_end - pi);
      std::size_t value_end;
      if (literal.empty()) {
        value_end = text.size();
        pi = lit_end;
      } else {
        value_end = text.find(literal, ti);
        if (value_end == std::string_view::npos) return false;
      }
      if (value_end == ti) return false;  // empty slot value
      slots[name] = std::string(text.substr(ti, value_end - ti));
      ti = value_end;
    } else {
      std::size_t lit_end = pattern.find('{', pi);
      if (lit_end == std::string_view::npos) lit_end = pattern.size();
      const std::string_view literal = pattern.substr(pi, lit_end - pi);
      if (text.compare(ti, literal.size(), literal) != 0) return false;
      ti += literal.size();
      pi = lit_end;
    }
  }
  return ti == text.size();
}

const std::vector<std::string> kDistanceChoices = {"Closer", "Farther", "About the same"};
const std::vector<std::string> kDominanceChoices = {"Direction changed more",
                                                    "Distance changed more", "Comparable"};

// Tracks sorted the way prompts list them.
std::vector<const EventTrack*> prompt_order(const SceneMetadata& scene) {
  std::vector<const EventTrack*> order;
  for (const auto& t : scene.tracks) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const EventTrack* a, const EventTrack* b) {
    if (a->first_frame() != b->first_frame()) return a->first_frame() < b->first_frame();
    return a->label < b->label;
  });
  return order;
}

std::vector<const EventTrack*> unique_label_tracks(const SceneMetadata& scene) {
  std::map<std::string, int> counts;
  for (const auto& t : scene.tracks) ++counts[t.label];
  std::vector<const EventTrack*> out;
  for (const EventTrack* t : prompt_order(scene)) {
    if (counts[t->label] == 1) out.push_back(t);
  }
  return out;
}

const EventTrack* find_unique_track(const SceneMetadata& scene, const std::string& label,
                                    std::string* diagnostic) {
  const EventTrack* found = nullptr;
  for (const auto& t : scene.tracks) {
    if (t.label != label) continue;
    if (found != nullptr) {
      if (diagnostic) *diagnostic = "label '" + label + "' is ambiguous in scene";
      return nullptr;
    }
    found = &t;
  }
  if (found == nullptr && diagnostic) {
    *diagnostic = "label '" + label + "' not present in scene";
  }
  return found;
}

double aspect_value(const EventTrack& track, CompareAspect aspect, const Tolerances& tol,
                    SignConvention convention) {
  const MotionSummary s = summarize_motion(track, tol, convention);
  switch (aspect) {
    case CompareAspect::ClosestApproach: return s.min_dist_m;
    case CompareAspect::LargestDirectionShift: return s.total_doa_change_deg;
    case CompareAspect::LargestDistanceChange: return s.total_dist_change_m;
  }
  return 0.0;
}

const RegionPhrase* pick_phrase_containing(DoABucket bucket, DetRng& rng) {
  std::vector<const RegionPhrase*> options;
  for (const auto& entry : region_lexicon()) {
    if (region_contains(entry, bucket)) options.push_back(&entry);
  }
  return options[rng.below(options.size())];
}

const RegionPhrase* pick_phrase_avoiding(DoABucket bucket, DetRng& rng) {
  std::vector<const RegionPhrase*> options;
  for (const auto& entry : region_lexicon()) {
    if (!region_contains(entry, bucket)) options.push_back(&entry);
  }
  return options[rng.below(options.size())];
}

std::vector<int> templates_for(Category category, bool boolean) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < kTemplates.size(); ++i) {
    if (kTemplates[i].category == category && kTemplates[i].boolean == boolean) {
      ids.push_back(static_cast<int>(i));
    }
  }
  return ids;
}

}  // namespace

std::string category_name(Category category) {
  switch (category) {
    case Category::DoATrajectory: return "doa_trajectory";
    case Category::DistanceDynamics: return "distance_dynamics";
    case Category::CrossSource: return "cross_source";
    case Category::DistVsDoA: return "dist_vs_doa";
  }
  return "doa_trajectory";
}

std::optional<Category> category_from_name(const std::string& name) {
  if (name == "doa_trajectory") return Category::DoATrajectory;
  if (name == "distance_dynamics") return Category::DistanceDynamics;
  if (name == "cross_source") return Category::CrossSource;
  if (name == "dist_vs_doa") return Category::DistVsDoA;
  return std::nullopt;
}

bool recognize_item(QAItem& item) {
  for (std::size_t i = 0; i < kTemplates.size(); ++i) {
    const TemplateDef& def = kTemplates[i];
    std::map<std::string, std::string> slots;
    if (!match_pattern(def.pattern, item.prompt, slots)) continue;

    QuerySlots out;
    out.template_id = static_cast<int>(i);
    out.aspect = def.aspect;
    if (auto it = slots.find("label"); it != slots.end()) out.label = it->second;
    if (auto it = slots.find("b"); it != slots.end()) out.label_b = it->second;
    if (auto it = slots.find("from"); it != slots.end()) {
      const RegionPhrase* phrase = find_region_phrase(it->second);
      if (phrase == nullptr) continue;
      out.from_region = phrase->buckets;
    }
    if (auto it = slots.find("to"); it != slots.end()) {
      const RegionPhrase* phrase = find_region_phrase(it->second);
      if (phrase == nullptr) continue;
      out.to_region = phrase->buckets;
    }
    item.category = def.category;
    item.slots = std::move(out);
    return true;
  }
  item.category.reset();
  item.slots = QuerySlots{};
  return false;
}

std::optional<std::string> compute_answer(const SceneMetadata& scene, const QAItem& item,
                                          const Tolerances& tol, double comparable_margin,
                                          SignConvention convention, std::string* diagnostic) {
  auto fail = [&](const std::string& why) -> std::optional<std::string> {
    if (diagnostic) *diagnostic = why;
    return std::nullopt;
  };

  QAItem probe = item;
  if (!probe.category) {
    if (!recognize_item(probe)) return fail("unrecognized question template");
  }
  const TemplateDef& def = kTemplates[static_cast<std::size_t>(probe.slots.template_id)];
  if (def.boolean != (probe.type == "boolean")) {
    return fail("question type does not match the recognized template");
  }

  auto in_choices = [&](const std::string& text) {
    return std::find(probe.choices.begin(), probe.choices.end(), text) != probe.choices.end();
  };
  auto mcq_answer = [&](const std::string& text) -> std::optional<std::string> {
    if (!in_choices(text)) return fail("computed answer '" + text + "' is not among the choices");
    return text;
  };

  std::string why;
  switch (*probe.category) {
    case Category::DoATrajectory: {
      const EventTrack* track = find_unique_track(scene, probe.slots.label, &why);
      if (track == nullptr) return fail(why);
      const bool matches = trajectory_matches(*track, tol, probe.slots.from_region,
                                              probe.slots.to_region, convention);
      return matches ? "Yes" : "No";
    }
    case Category::DistanceDynamics: {
      const EventTrack* track = find_unique_track(scene, probe.slots.label, &why);
      if (track == nullptr) return fail(why);
      return mcq_answer(distance_trend_name(distance_dynamics(*track, tol)));
    }
    case Category::CrossSource: {
      if (def.boolean) {
        const EventTrack* a = find_unique_track(scene, probe.slots.label, &why);
        if (a == nullptr) return fail(why);
        const EventTrack* b = find_unique_track(scene, probe.slots.label_b, &why);
        if (b == nullptr) return fail(why);
        const double va = aspect_value(*a, *probe.slots.aspect, tol, convention);
        const double vb = aspect_value(*b, *probe.slots.aspect, tol, convention);
        // Strict comparison: equality answers "No".
        const bool yes = *probe.slots.aspect == CompareAspect::ClosestApproach ? va < vb
                                                                               : va > vb;
        return yes ? "Yes" : "No";
      }
      try {
        const CrossSourceResult result =
            cross_source_compare(scene, *probe.slots.aspect, tol, convention);
        return mcq_answer(result.winner);
      } catch (const Error& e) {
        return fail(e.what());
      }
    }
    case Category::DistVsDoA: {
      const EventTrack* track = find_unique_track(scene, probe.slots.label, &why);
      if (track == nullptr) return fail(why);
      return mcq_answer(
          dominant_aspect_name(dominant_change(*track, tol, comparable_margin, convention)));
    }
  }
  return fail("unhandled category");
}

GenResult generate_qa(const SceneMetadata& scene, const GenOptions& options) {
  {
    const auto diags = validate_scene(scene);
    if (!diags.empty()) throw_validation("generate_qa: invalid scene: " + diags.front());
  }
  if (options.per_category < 1) throw_validation("generate_qa: per_category must be >= 1");

  GenResult result;
  const std::uint64_t base = mix_seed(fnv1a64(scene.clip_id), options.seed);
  const auto uniques = unique_label_tracks(scene);

  const Category order[] = {Category::DoATrajectory, Category::DistanceDynamics,
                            Category::CrossSource, Category::DistVsDoA};
  for (Category category : order) {
    if (!options.categories.count(category)) continue;
    for (int j = 0; j < options.per_category; ++j) {
      DetRng rng(mix_seed(base, fnv1a64(category_name(category)) + static_cast<std::uint64_t>(j)));
      const std::string skip_prefix =
          scene.clip_id + ": " + category_name(category) + ": ";

      QAItem item;
      item.clip_id = scene.clip_id;

      switch (category) {
        case Category::DoATrajectory: {
          if (uniques.empty()) {
            result.skips.push_back(skip_prefix + "no uniquely labeled track");
            continue;
          }
          const EventTrack* track = uniques[rng.below(uniques.size())];
          const auto ids = templates_for(category, true);
          const int tid = ids[rng.below(ids.size())];
          const MotionSummary s = summarize_motion(*track, options.tol, options.convention);
          const bool aim_for_yes =
              rng.below(2) == 0 && s.total_doa_change_deg >= options.tol.doa_deg;
          const RegionPhrase* from = aim_for_yes ? pick_phrase_containing(s.start_bucket, rng)
                                                 : pick_phrase_avoiding(s.start_bucket, rng);
          const RegionPhrase* to = pick_phrase_containing(s.end_bucket, rng);
          item.type = "boolean";
          item.scoring = "exact";
          item.prompt = render_pattern(kTemplates[static_cast<std::size_t>(tid)].pattern,
                                       track->label, "", from->phrase, to->phrase);
          item.category = category;
          item.slots.template_id = tid;
          item.slots.label = track->label;
          item.slots.from_region = from->buckets;
          item.slots.to_region = to->buckets;
          break;
        }
        case Category::DistanceDynamics: {
          if (uniques.empty()) {
            result.skips.push_back(skip_prefix + "no uniquely labeled track");
            continue;
          }
          const EventTrack* track = uniques[rng.below(uniques.size())];
          const auto ids = templates_for(category, false);
          const int tid = ids[rng.below(ids.size())];
          item.type = "mcq-single";
          item.scoring = "choice_match";
          item.choices = kDistanceChoices;
          item.prompt = render_pattern(kTemplates[static_cast<std::size_t>(tid)].pattern,
                                       track->label, "", "", "");
          item.category = category;
          item.slots.template_id = tid;
          item.slots.label = track->label;
          break;
        }
        case Category::CrossSource: {
          if (scene.tracks.size() < 2) {
            result.skips.push_back(skip_prefix + "needs >= 2 tracks");
            continue;
          }
          const bool all_unique = uniques.size() == scene.tracks.size();
          bool use_mcq;
          if (all_unique) {
            use_mcq = rng.below(2) == 0;
          } else if (uniques.size() >= 2) {
            use_mcq = false;
          } else {
            result.skips.push_back(skip_prefix + "track labels not unique");
            continue;
          }
          const auto ids = templates_for(category, !use_mcq);
          const int tid = ids[rng.below(ids.size())];
          const TemplateDef& def = kTemplates[static_cast<std::size_t>(tid)];
          item.category = category;
          item.slots.template_id = tid;
          item.slots.aspect = def.aspect;
          if (use_mcq) {
            item.type = "mcq-single";
            item.scoring = "choice_match";
            for (const EventTrack* t : prompt_order(scene)) item.choices.push_back(t->label);
            item.prompt = render_pattern(def.pattern, "", "", "", "");
          } else {
            const std::size_t ai = rng.below(uniques.size());
            std::size_t bi = rng.below(uniques.size() - 1);
            if (bi >= ai) ++bi;
            item.type = "boolean";
            item.scoring = "exact";
            item.slots.label = uniques[ai]->label;
            item.slots.label_b = uniques[bi]->label;
            item.prompt = render_pattern(def.pattern, uniques[ai]->label, uniques[bi]->label,
                                         "", "");
          }
          break;
        }
        case Category::DistVsDoA: {
          if (uniques.empty()) {
            result.skips.push_back(skip_prefix + "no uniquely labeled track");
            continue;
          }
          const EventTrack* track = uniques[rng.below(uniques.size())];
          const auto ids = templates_for(category, false);
          const int tid = ids[rng.below(ids.size())];
          item.type = "mcq-single";
          item.scoring = "choice_match";
          item.choices = kDominanceChoices;
          item.prompt = render_pattern(kTemplates[static_cast<std::size_t>(tid)].pattern,
                                       track->label, "", "", "");
          item.category = category;
          item.slots.template_id = tid;
          item.slots.label = track->label;
          break;
        }
      }

      std::string why;
      const auto answer = compute_answer(scene, item, options.tol, options.comparable_margin,
                                         options.convention, &why);
      if (!answer) {
        result.skips.push_back(skip_prefix + "answer undefined: " + why);
        continue;
      }
      item.answer = *answer;
      result.items.push_back(std::move(item));
    }
  }
  return result;
}

std::string serialize_benchmark(const std::vector<QAItem>& items) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const QAItem& item : items) {
    if (item.clip_id.empty() || item.prompt.empty()) {
      throw_validation("serialize_benchmark: item missing clip_id or prompt");
    }
    if (item.type != "boolean" && item.type != "mcq-single") {
      throw_validation("serialize_benchmark: bad type '" + item.type + "'");
    }
    if (item.type == "boolean") {
      if (item.answer != "Yes" && item.answer != "No") {
        throw_validation("serialize_benchmark: boolean answer must be Yes or No");
      }
      if (item.scoring != "exact" || !item.choices.empty()) {
        throw_validation("serialize_benchmark: boolean items use exact scoring and no choices");
      }
    } else {
      if (item.choices.size() < 2) {
        throw_validation("serialize_benchmark: MCQ needs at least 2 choices");
      }
      if (std::find(item.choices.begin(), item.choices.end(), item.answer) ==
          item.choices.end()) {
        throw_validation("serialize_benchmark: MCQ answer not among choices");
      }
    }
    nlohmann::ordered_json el;
    el["clip_id"] = item.clip_id;
    el["type"] = item.type;
    el["prompt"] = item.prompt;
    if (item.is_mcq()) el["choices"] = item.choices;
    el["answer"] = item.answer;
    el["scoring"] = item.scoring;
    arr.push_back(std::move(el));
  }
  return arr.dump(2);
}

std::vector<QAItem> parse_benchmark(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_validation(std::string("malformed benchmark JSON: ") + e.what());
  }
  if (!doc.is_array()) throw_validation("benchmark must be a JSON array");

  static const std::set<std::string> kAllowed = {"clip_id", "type",   "prompt",
                                                 "choices", "answer", "scoring"};
  std::vector<QAItem> items;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& el = doc[i];
    const std::string at = "element " + std::to_string(i) + ": ";
    if (!el.is_object()) throw_validation(at + "not an object");
    for (const auto& [key, value] : el.items()) {
      if (!kAllowed.count(key)) throw_validation(at + "unknown key '" + key + "'");
    }
    for (const char* key : {"clip_id", "type", "prompt", "answer", "scoring"}) {
      if (!el.contains(key) || !el[key].is_string()) {
        throw_validation(at + "missing or non-string key '" + std::string(key) + "'");
      }
    }
    QAItem item;
    item.clip_id = el["clip_id"].get<std::string>();
    item.type = el["type"].get<std::string>();
    item.prompt = el["prompt"].get<std::string>();
    item.answer = el["answer"].get<std::string>();
    item.scoring = el["scoring"].get<std::string>();
    if (item.clip_id.empty()) throw_validation(at + "empty clip_id");
    if (item.type != "boolean" && item.type != "mcq-single") {
      throw_validation(at + "type must be 'boolean' or 'mcq-single'");
    }
    if (item.scoring != "exact" && item.scoring != "choice_match") {
      throw_validation(at + "scoring must be 'exact' or 'choice_match'");
    }
    if (item.type == "boolean") {
      if (el.contains("choices")) throw_validation(at + "boolean item must omit 'choices'");
      if (item.answer != "Yes" && item.answer != "No") {
        throw_validation(at + "boolean answer must be 'Yes' or 'No'");
      }
      if (item.scoring != "exact") throw_validation(at + "boolean items use 'exact' scoring");
    } else {
      if (!el.contains("choices") || !el["choices"].is_array()) {
        throw_validation(at + "MCQ item needs a 'choices' array");
      }
      for (const auto& c : el["choices"]) {
        if (!c.is_string()) throw_validation(at + "choices must be strings");
        item.choices.push_back(c.get<std::string>());
      }
      if (item.choices.size() < 2) throw_validation(at + "MCQ needs at least 2 choices");
      std::set<std::string> distinct(item.choices.begin(), item.choices.end());
      if (distinct.size() != item.choices.size()) {
        throw_validation(at + "choices must be distinct");
      }
      if (!distinct.count(item.answer)) throw_validation(at + "answer not among choices");
    }
    recognize_item(item);  // best effort; foreign prompts stay uncategorized
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace saqa
