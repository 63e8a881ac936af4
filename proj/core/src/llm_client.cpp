#include "saqa/llm_client.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "saqa/common.hpp"
#include "saqa/rng.hpp"

namespace saqa {
namespace {

struct SplitUrl {
  std::string host_part;  // scheme://host[:port]
  std::string path_prefix;
};

SplitUrl split_base_url(const std::string& base_url) {
  const std::size_t scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw_validation("base_url must start with http:// or https://: " + base_url);
  }
  const std::string scheme = base_url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw_validation("unsupported URL scheme '" + scheme + "' in " + base_url);
  }
  const std::size_t path_start = base_url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.host_part = base_url;
  } else {
    out.host_part = base_url.substr(0, path_start);
    out.path_prefix = base_url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
      out.path_prefix.pop_back();
    }
  }
  return out;
}

double backoff_seconds(const LlmEndpointConfig& cfg, int attempt) {
  static std::atomic<std::uint64_t> counter{0};
  DetRng rng(mix_seed(0x6a697474ULL, counter.fetch_add(1)));
  const double jitter = cfg.backoff_jitter_fraction * rng.uniform();
  return cfg.backoff_base_s * std::pow(2.0, attempt) * (1.0 + jitter);
}

}  // namespace

LlmResult query_llm(const LlmEndpointConfig& cfg, const std::string& system_text,
                    const std::string& user_text) {
  LlmResult result;
  if (cfg.model_name.empty()) {
    result.status = LlmStatus::BadRequest;
    result.error = "model name is empty";
    return result;
  }

  std::string bearer;
  if (!cfg.api_key_env.empty()) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      result.status = LlmStatus::AuthFailure;
      result.error = "environment variable '" + cfg.api_key_env + "' is not set";
      return result;
    }
    bearer = key;
  }

  const SplitUrl url = split_base_url(cfg.base_url);
  httplib::Client client(url.host_part);
  const auto timeout_us = std::chrono::microseconds(
      static_cast<long long>(cfg.timeout_s * 1e6));
  client.set_connection_timeout(timeout_us);
  client.set_read_timeout(timeout_us);
  client.set_write_timeout(timeout_us);
  if (!bearer.empty()) client.set_bearer_token_auth(bearer);

  nlohmann::json body;
  body["model"] = cfg.model_name;
  body["messages"] = {{{"role", "system"}, {"content", system_text}},
                      {{"role", "user"}, {"content", user_text}}};
  body["temperature"] = cfg.temperature;
  const std::string payload = body.dump();
  const std::string path = url.path_prefix + "/chat/completions";

  const int max_attempts = 1 + std::max(0, cfg.max_retries);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::duration<double>(backoff_seconds(cfg, attempt - 1)));
    }
    ++result.requests_made;
    httplib::Result res = client.Post(path, payload, "application/json");

    if (!res) {
      result.http_status = 0;
      result.error = "transport error: " + httplib::to_string(res.error());
      continue;  // timeouts and connection failures are retryable
    }
    result.http_status = res->status;
    if (res->status == 401 || res->status == 403) {
      result.status = LlmStatus::AuthFailure;
      result.error = "authentication failed (HTTP " + std::to_string(res->status) + ")";
      return result;
    }
    if (res->status >= 500 || res->status == 429) {
      result.error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      result.status = LlmStatus::BadRequest;
      result.error = "HTTP " + std::to_string(res->status) + ": " + res->body;
      return result;
    }

    try {
      const nlohmann::json reply = nlohmann::json::parse(res->body);
      result.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      result.status = LlmStatus::MalformedResponse;
      result.error = std::string("malformed response body: ") + e.what();
      return result;
    }
    result.status = LlmStatus::Ok;
    return result;
  }

  result.status = LlmStatus::RetriesExhausted;
  if (result.error.empty()) result.error = "retries exhausted";
  result.error = "retries exhausted after " + std::to_string(result.requests_made) +
                 " requests (last: " + result.error + ")";
  return result;
}

}  // namespace saqa
