#pragma once

#include <cstdint>
#include <string>

namespace saqa {

struct LlmEndpointConfig {
  std::string base_url;      // e.g. "http://localhost:8080/v1"
  std::string model_name;
  std::string api_key_env;   // empty = keyless endpoint
  double timeout_s = 30.0;
  int max_retries = 3;
  int max_parallel = 4;
  double temperature = 0.0;  // greedy decoding
  // Exponential backoff: base * 2^attempt plus up to jitter_fraction extra.
  double backoff_base_s = 1.0;
  double backoff_jitter_fraction = 0.25;
};

enum class LlmStatus {
  Ok,
  RetriesExhausted,
  AuthFailure,
  BadRequest,
  MalformedResponse,
};

struct LlmResult {
  LlmStatus status = LlmStatus::Ok;
  std::string text;     // assistant message on success
  std::string error;    // diagnostic otherwise
  int requests_made = 0;
  int http_status = 0;  // last HTTP status, 0 for transport errors
  bool ok() const { return status == LlmStatus::Ok; }
};

// One chat-completion request (system + user message) against
// {base_url}/chat/completions. Retries timeouts, transport errors, 5xx and
// 429 with exponential backoff up to max_retries; 401/403 fail immediately
// as AuthFailure, other 4xx as BadRequest. Total requests <= 1 + max_retries.
LlmResult query_llm(const LlmEndpointConfig& cfg, const std::string& system_text,
                    const std::string& user_text);

}  // namespace saqa
