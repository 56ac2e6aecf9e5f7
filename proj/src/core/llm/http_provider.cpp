#include "core/llm/http_provider.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace prof::llm {
namespace {

using nlohmann::json;

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos)
    raise(Errc::config, "endpoint must start with http:// or https://");
  size_t path_start = endpoint.find('/', scheme + 3);
  if (path_start == std::string::npos) return {endpoint, "/v1/chat/completions"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

json build_request(const std::vector<ChatMessage>& messages,
                   const GenerationConfig& config) {
  json msgs = json::array();
  for (const auto& m : messages)
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model", config.model},
              {"messages", std::move(msgs)},
              {"temperature", config.temperature},
              {"top_p", config.top_p},
              {"max_tokens", config.max_output_tokens}};
}

Completion parse_response(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded())
    raise(Errc::transport, "provider returned unparseable JSON");
  if (!doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty())
    raise(Errc::transport, "provider response has no choices");
  const json& msg = doc["choices"][0];
  if (!msg.contains("message") || !msg["message"].contains("content") ||
      !msg["message"]["content"].is_string())
    raise(Errc::transport, "provider response has no message content");
  Completion c;
  c.text = msg["message"]["content"].get<std::string>();
  if (doc.contains("usage") && doc["usage"].is_object()) {
    c.prompt_tokens = doc["usage"].value("prompt_tokens", int64_t(0));
    c.completion_tokens = doc["usage"].value("completion_tokens", int64_t(0));
  }
  return c;
}

int retry_after_ms(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return -1;
  const std::string v = res.get_header_value("Retry-After");
  char* end = nullptr;
  long secs = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || secs < 0) return -1;
  return int(secs * 1000);
}

}  // namespace

HttpProvider::HttpProvider(std::string endpoint, std::string api_key,
                           HttpOptions options)
    : api_key_(std::move(api_key)), options_(options) {
  std::tie(base_, path_) = split_endpoint(endpoint);
  if (options_.max_attempts < 1)
    raise(Errc::config, "max_attempts must be >= 1");
}

Completion HttpProvider::complete(const std::vector<ChatMessage>& messages,
                                  const GenerationConfig& config) {
  const std::string body = build_request(messages, config).dump();
  httplib::Headers headers;
  if (!api_key_.empty())
    headers.emplace("Authorization", "Bearer " + api_key_);

  int backoff_ms = options_.backoff_base_ms;
  std::string last_failure = "no attempt made";
  bool last_was_rate_limit = false;

  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    httplib::Client client(base_);
    client.set_connection_timeout(options_.request_timeout_s, 0);
    client.set_read_timeout(options_.request_timeout_s, 0);
    client.set_write_timeout(options_.request_timeout_s, 0);

    auto res = client.Post(path_, headers, body, "application/json");
    int sleep_ms = -1;
    if (!res) {
      last_failure = "connection failed (" + httplib::to_string(res.error()) + ")";
      last_was_rate_limit = false;
    } else if (res->status == 200) {
      return parse_response(res->body);
    } else if (res->status == 429) {
      last_failure = "provider rate limited the request (429)";
      last_was_rate_limit = true;
      sleep_ms = retry_after_ms(*res);
    } else if (res->status >= 500) {
      last_failure = "provider returned status " + std::to_string(res->status);
      last_was_rate_limit = false;
    } else {
      raise(Errc::transport,
            "provider returned status " + std::to_string(res->status));
    }

    if (attempt == options_.max_attempts) break;
    if (sleep_ms < 0) sleep_ms = backoff_ms;
    sleep_ms = std::min(sleep_ms, options_.backoff_cap_ms);
    std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
    backoff_ms = std::min(backoff_ms * 2, options_.backoff_cap_ms);
  }

  raise(last_was_rate_limit ? Errc::rate_limited : Errc::transport,
        last_failure + " after " + std::to_string(options_.max_attempts) +
            " attempts");
}

HttpProvider http_provider_from_env(HttpOptions options) {
  const char* endpoint = std::getenv("PROF_LLM_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0')
    raise(Errc::config, "PROF_LLM_ENDPOINT is not set");
  const char* key = std::getenv("PROF_LLM_KEY");
  return HttpProvider(endpoint, key ? key : "", options);
}

}  // namespace prof::llm
