#include "saqa/runner.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "saqa/common.hpp"

namespace saqa {
namespace {

struct PendingItem {
  const QAItem* item;
  std::size_t index;  // per-clip index
};

}  // namespace

RunnerStats run_answers(
    const std::vector<QAItem>& items,
    const std::function<const SceneMetadata*(const std::string& clip_id)>& scene_lookup,
    const std::string& journal_path, const RunnerOptions& options) {
  RunnerStats stats;
  stats.total_items = items.size();

  std::set<std::pair<std::string, std::size_t>> done;
  for (const AnswerRecord& r : read_journal(journal_path)) {
    done.insert({r.clip_id, r.index});
  }

  std::vector<PendingItem> pending;
  std::map<std::string, std::size_t> next_index;
  for (const QAItem& item : items) {
    const std::size_t idx = next_index[item.clip_id]++;
    if (done.count({item.clip_id, idx})) {
      ++stats.already_answered;
    } else {
      pending.push_back({&item, idx});
    }
  }
  if (pending.empty()) return stats;

  std::ofstream journal(journal_path, std::ios::app);
  if (!journal) throw_io("cannot open journal for appending: " + journal_path);
  std::mutex sink_mutex;

  auto journal_record = [&](const AnswerRecord& record) {
    std::lock_guard<std::mutex> lock(sink_mutex);
    journal << answer_record_json(record) << "\n";
    journal.flush();
    if (!journal) throw_io("write failure on journal: " + journal_path);
    ++stats.answered_now;
    if (record.unparseable) ++stats.unparseable_now;
  };
  auto report_failure = [&](const PendingItem& p, const std::string& message) {
    std::lock_guard<std::mutex> lock(sink_mutex);
    stats.failures.push_back({p.item->clip_id, p.index, message});
  };

  if (options.mode == AnswerMode::Oracle) {
    for (const PendingItem& p : pending) {
      AnswerRecord record;
      record.clip_id = p.item->clip_id;
      record.index = p.index;
      record.answered_by = "oracle";
      record.latency_s = 0.0;
      const SceneMetadata* scene = scene_lookup(p.item->clip_id);
      if (scene == nullptr) {
        record.unparseable = true;
        record.raw_response = "cannot answer: no metadata for clip '" + p.item->clip_id + "'";
      } else {
        const RuleAnswer answer =
            rule_answer(*scene, *p.item, options.tol, options.convention,
                        options.comparable_margin);
        if (answer.answered) {
          record.raw_response = answer.text;
          record.extracted_answer = answer.text;
        } else {
          record.unparseable = true;
          record.raw_response = "cannot answer: " + answer.diagnostic;
        }
      }
      journal_record(record);
    }
    return stats;
  }

  // LLM mode: bounded fan-out over a shared work index.
  const std::size_t workers =
      std::min<std::size_t>(std::max(1, options.endpoint.max_parallel), pending.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= pending.size()) return;
      const PendingItem& p = pending[i];

      const SceneMetadata* scene = scene_lookup(p.item->clip_id);
      if (scene == nullptr) {
        report_failure(p, "no metadata for clip '" + p.item->clip_id + "'");
        continue;
      }
      const PromptPair prompt = build_llm_prompt(*scene, *p.item, options.convention,
                                                 options.frame_period_s, options.tol);
      const auto started = std::chrono::steady_clock::now();
      const LlmResult result = query_llm(options.endpoint, prompt.system_text, prompt.user_text);
      const double latency =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      if (!result.ok()) {
        report_failure(p, result.error);
        continue;
      }
      AnswerRecord record;
      record.clip_id = p.item->clip_id;
      record.index = p.index;
      record.answered_by = "llm";
      record.latency_s = latency;
      record.raw_response = result.text;
      const auto extracted = extract_answer(result.text, *p.item, options.extract);
      if (extracted) {
        record.extracted_answer = *extracted;
      } else {
        record.unparseable = true;
      }
      journal_record(record);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return stats;
}

}  // namespace saqa
