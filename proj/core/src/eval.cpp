#include "saqa/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "saqa/common.hpp"

namespace saqa {
namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Lowercase, punctuation mapped to spaces, whitespace collapsed. When a map
// is supplied, map[i] holds the source index of normalized character i.
std::string normalize(const std::string& s, std::vector<std::size_t>* map = nullptr) {
  std::string out;
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) {
        out.push_back(' ');
        if (map) map->push_back(i);
      }
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
      if (map) map->push_back(i);
    } else {
      pending_space = true;
    }
  }
  return out;
}

bool equal_normalized(const std::string& a, const std::string& b) {
  return normalize(a) == normalize(b);
}

// Strips reasoning spans delimited by the marker pair; an unclosed opener
// discards the rest of the text.
std::string strip_reasoning(const std::string& raw, const ExtractOptions& options) {
  if (options.reasoning_open.empty() || options.reasoning_close.empty()) return raw;
  std::string out;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    const std::size_t open = raw.find(options.reasoning_open, pos);
    if (open == std::string::npos) {
      out += raw.substr(pos);
      break;
    }
    out += raw.substr(pos, open - pos);
    const std::size_t close = raw.find(options.reasoning_close, open + options.reasoning_open.size());
    if (close == std::string::npos) break;
    pos = close + options.reasoning_close.size();
  }
  return out;
}

// Position just past the last whole-word occurrence of `needle` in the
// normalized haystack, or npos.
std::size_t last_word_match(const std::string& haystack_norm, const std::string& needle_norm) {
  if (needle_norm.empty()) return std::string::npos;
  std::size_t best = std::string::npos;
  std::size_t pos = 0;
  while ((pos = haystack_norm.find(needle_norm, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || haystack_norm[pos - 1] == ' ';
    const std::size_t end = pos + needle_norm.size();
    const bool right_ok = end == haystack_norm.size() || haystack_norm[end] == ' ';
    if (left_ok && right_ok) best = end;
    ++pos;
  }
  return best;
}

// Letter tags: "(x)" in any case anywhere, or a standalone uppercase letter
// optionally followed by ')', '.', ':' or ','. The uppercase requirement for
// bare letters keeps the article "a" from matching choice A.
std::size_t last_letter_tag(const std::string& visible, char letter) {
  const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
  const char lower_c = static_cast<char>(std::tolower(static_cast<unsigned char>(letter)));
  std::size_t best = std::string::npos;
  for (std::size_t i = 0; i < visible.size(); ++i) {
    const char c = visible[i];
    if (c != upper && c != lower_c) continue;
    const bool parenthesized = i > 0 && visible[i - 1] == '(' && i + 1 < visible.size() &&
                               visible[i + 1] == ')';
    if (parenthesized) {
      best = i + 2;
      continue;
    }
    if (c != upper) continue;  // bare tags must be uppercase
    const bool left_ok = i == 0 || std::isspace(static_cast<unsigned char>(visible[i - 1]));
    if (!left_ok) continue;
    if (i + 1 == visible.size()) {
      best = i + 1;
      continue;
    }
    const char next = visible[i + 1];
    if (next == ')' || next == '.' || next == ':' || next == ',') {
      const bool tail_ok = i + 2 == visible.size() ||
                           std::isspace(static_cast<unsigned char>(visible[i + 2]));
      if (tail_ok) best = i + 2;
    } else if (std::isspace(static_cast<unsigned char>(next))) {
      best = i + 1;
    }
  }
  return best;
}

}  // namespace

RuleAnswer rule_answer(const SceneMetadata& scene, const QAItem& item, const Tolerances& tol,
                       SignConvention convention, double comparable_margin) {
  RuleAnswer out;
  std::string why;
  const auto answer = compute_answer(scene, item, tol, comparable_margin, convention, &why);
  if (answer) {
    out.answered = true;
    out.text = *answer;
  } else {
    out.diagnostic = why;
  }
  return out;
}

PromptPair build_llm_prompt(const SceneMetadata& scene, const QAItem& item,
                            SignConvention convention, double frame_period_s,
                            const Tolerances& tol) {
  char buf[1024];
  PromptPair out;

  const char* left_right =
      convention == SignConvention::PositiveLeft
          ? "positive values are to the listener's LEFT and negative values to the RIGHT"
          : "positive values are to the listener's RIGHT and negative values to the LEFT";
  std::snprintf(
      buf, sizeof(buf),
      "You answer questions about sound sources in a short audio clip using structured "
      "spatial metadata.\n"
      "Metadata format: a JSON array with one object per sound event. Keys: \"Event\" (the "
      "sound class), \"DoA\" (direction of arrival in degrees at each active frame), \"Source "
      "distance\" (distance from the listener in meters, between 0 and 6), \"Time frames\" "
      "(the active times in seconds).\n"
      "DoA convention: degrees from -90 to +90 where 0 is straight ahead; %s.\n"
      "Directional regions: front-left (+45 to +90), slightly left (+15 to +45), front (-15 "
      "to +15), slightly right (-45 to -15), front-right (-90 to -45).\n"
      "A change of at least %g degrees in DoA or %g m in distance between frames counts as "
      "significant movement.\n",
      left_right, tol.doa_deg, tol.dist_m);
  out.system_text = buf;
  if (item.is_mcq()) {
    out.system_text +=
        "Answer with exactly one of the provided choices, verbatim, and nothing else.";
  } else {
    out.system_text += "Answer Yes or No, and nothing else.";
  }

  out.user_text = tracks_to_prompt(scene, frame_period_s);
  out.user_text += "\n\nQuestion: " + item.prompt;
  if (item.is_mcq()) {
    out.user_text += "\nChoices:";
    for (std::size_t i = 0; i < item.choices.size(); ++i) {
      out.user_text += " (";
      out.user_text += static_cast<char>('A' + i);
      out.user_text += ") " + item.choices[i];
    }
  }
  return out;
}

std::optional<std::string> extract_answer(const std::string& raw, const QAItem& item,
                                          const ExtractOptions& options) {
  const std::string visible = strip_reasoning(raw, options);
  const std::string visible_norm = normalize(visible);

  if (!item.is_mcq()) {
    const std::size_t yes = last_word_match(visible_norm, "yes");
    const std::size_t no = last_word_match(visible_norm, "no");
    if (yes == std::string::npos && no == std::string::npos) return std::nullopt;
    if (yes == std::string::npos) return "No";
    if (no == std::string::npos) return "Yes";
    return yes > no ? "Yes" : "No";
  }

  // MCQ: latest of any choice text or letter tag, compared at positions in
  // the visible string; choice text wins ties with tags.
  std::vector<std::size_t> norm_map;
  const std::string norm = normalize(visible, &norm_map);
  std::optional<std::string> best_choice;
  double best_pos = -1.0;
  for (std::size_t i = 0; i < item.choices.size(); ++i) {
    const std::size_t text_end = last_word_match(norm, normalize(item.choices[i]));
    if (text_end != std::string::npos && text_end > 0) {
      const double pos = static_cast<double>(norm_map[text_end - 1]) + 1.5;
      if (pos > best_pos) {
        best_pos = pos;
        best_choice = item.choices[i];
      }
    }
    if (i < 26) {
      const std::size_t tag_pos = last_letter_tag(visible, static_cast<char>('A' + i));
      if (tag_pos != std::string::npos) {
        const double pos = static_cast<double>(tag_pos);
        if (pos > best_pos) {
          best_pos = pos;
          best_choice = item.choices[i];
        }
      }
    }
  }
  return best_choice;
}

std::string answer_record_json(const AnswerRecord& record) {
  nlohmann::ordered_json j;
  j["clip_id"] = record.clip_id;
  j["index"] = record.index;
  j["raw_response"] = record.raw_response;
  j["extracted_answer"] = record.extracted_answer;
  j["unparseable"] = record.unparseable;
  j["latency_s"] = record.latency_s;
  j["answered_by"] = record.answered_by;
  return j.dump();
}

AnswerRecord answer_record_from_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw_validation(std::string("malformed journal record: ") + e.what());
  }
  AnswerRecord r;
  try {
    r.clip_id = j.at("clip_id").get<std::string>();
    r.index = j.at("index").get<std::size_t>();
    r.raw_response = j.at("raw_response").get<std::string>();
    r.extracted_answer = j.at("extracted_answer").get<std::string>();
    r.unparseable = j.at("unparseable").get<bool>();
    r.latency_s = j.at("latency_s").get<double>();
    r.answered_by = j.at("answered_by").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw_validation(std::string("bad journal record: ") + e.what());
  }
  if (!r.unparseable && r.extracted_answer.empty()) {
    throw_validation("journal record has empty answer but is not flagged unparseable");
  }
  return r;
}

std::vector<AnswerRecord> read_journal(const std::string& path) {
  std::ifstream in(path);
  std::vector<AnswerRecord> out;
  if (!in) return out;  // absent journal = nothing answered yet
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(answer_record_from_json(line));
    } catch (const Error& e) {
      throw_validation("journal line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

EvalReport score(const std::vector<QAItem>& items, const std::vector<AnswerRecord>& answers) {
  if (items.empty()) throw_validation("nothing to score");

  // Key items by (clip_id, per-clip index).
  std::map<std::pair<std::string, std::size_t>, const QAItem*> by_key;
  std::map<std::string, std::size_t> next_index;
  std::vector<std::pair<std::string, std::size_t>> item_keys;
  for (const QAItem& item : items) {
    const std::size_t idx = next_index[item.clip_id]++;
    by_key[{item.clip_id, idx}] = &item;
    item_keys.emplace_back(item.clip_id, idx);
  }

  std::map<std::pair<std::string, std::size_t>, const AnswerRecord*> record_by_key;
  for (const AnswerRecord& r : answers) {
    const auto key = std::make_pair(r.clip_id, r.index);
    if (!by_key.count(key)) {
      throw_validation("misaligned answer set: no item for clip '" + r.clip_id + "' index " +
                       std::to_string(r.index));
    }
    if (!record_by_key.emplace(key, &r).second) {
      throw_validation("misaligned answer set: duplicate record for clip '" + r.clip_id +
                       "' index " + std::to_string(r.index));
    }
  }

  EvalReport report;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const QAItem& item = items[i];
    const auto key = item_keys[i];
    const std::string cat =
        item.category ? category_name(*item.category) : std::string("unrecognized");

    bool correct = false;
    const auto it = record_by_key.find(key);
    if (it != record_by_key.end()) {
      ++report.answered;
      const AnswerRecord& rec = *it->second;
      if (rec.unparseable) {
        ++report.unparseable_count;
      } else if (item.scoring == "choice_match") {
        correct = equal_normalized(rec.extracted_answer, item.answer);
      } else {
        correct = lower(trim(rec.extracted_answer)) == lower(trim(item.answer));
      }
    }

    auto& cat_count = report.per_category[cat];
    auto& type_count = report.per_type[item.type];
    ++cat_count.total;
    ++type_count.total;
    ++report.overall.total;
    if (correct) {
      ++cat_count.correct;
      ++type_count.correct;
      ++report.overall.correct;
    }
  }
  return report;
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["overall"] = {{"correct", report.overall.correct},
                  {"total", report.overall.total},
                  {"accuracy", report.overall.accuracy()}};
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (const auto& [name, count] : report.per_category) {
    cats[name] = {{"correct", count.correct}, {"total", count.total}, {"accuracy", count.accuracy()}};
  }
  j["per_category"] = std::move(cats);
  nlohmann::ordered_json types = nlohmann::ordered_json::object();
  for (const auto& [name, count] : report.per_type) {
    types[name] = {{"correct", count.correct}, {"total", count.total}, {"accuracy", count.accuracy()}};
  }
  j["per_type"] = std::move(types);
  j["unparseable_count"] = report.unparseable_count;
  j["coverage"] = {{"answered", report.answered}, {"total", report.overall.total}};
  j["metadata"] = {{"system_prompt", kSystemPromptVersion},
                   {"answer_extraction", kExtractionRulesVersion},
                   {"extraction_note",
                    "free-text answers are mapped to choices by last-match scanning; one "
                    "defensible realization among several"},
                   {"sign_convention", report.sign_convention}};
  return j.dump(2);
}

std::string report_table(const EvalReport& report) {
  const std::pair<const char*, const char*> columns[] = {
      {"DoA", "doa_trajectory"},
      {"DistDyn", "distance_dynamics"},
      {"CrossSrc", "cross_source"},
      {"Dist vs DoA", "dist_vs_doa"},
  };

  auto cell = [&](const char* key) -> std::string {
    const auto it = report.per_category.find(key);
    if (it == report.per_category.end() || it->second.total == 0) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * it->second.accuracy());
    return buf;
  };

  std::vector<std::string> headers, values;
  for (const auto& [header, key] : columns) {
    headers.push_back(header);
    values.push_back(cell(key));
  }
  headers.push_back("Overall");
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * report.overall.accuracy());
    values.push_back(buf);
  }

  auto format_row = [](const std::vector<std::string>& cells,
                       const std::vector<std::size_t>& widths) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) row += " | ";
      row += cells[i];
      row.append(widths[i] - cells[i].size(), ' ');
    }
    return row + "\n";
  };

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t i = 0; i < headers.size(); ++i) {
    widths[i] = std::max(headers[i].size(), values[i].size());
  }
  std::string out = format_row(headers, widths) + format_row(values, widths);

  // Question-type breakdown.
  std::vector<std::string> type_headers, type_values;
  for (const auto& [name, count] : report.per_type) {
    type_headers.push_back(name);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * count.accuracy());
    type_values.push_back(buf);
  }
  if (!type_headers.empty()) {
    std::vector<std::size_t> type_widths(type_headers.size());
    for (std::size_t i = 0; i < type_headers.size(); ++i) {
      type_widths[i] = std::max(type_headers[i].size(), type_values[i].size());
    }
    out += "\n" + format_row(type_headers, type_widths) + format_row(type_values, type_widths);
  }
  return out;
}

}  // namespace saqa
