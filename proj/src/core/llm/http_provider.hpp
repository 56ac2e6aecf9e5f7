#pragma once

#include "core/llm/provider.hpp"

namespace prof::llm {

struct HttpOptions {
  int max_attempts = 5;
  int backoff_base_ms = 1000;  // doubled per retry, capped below
  int backoff_cap_ms = 30000;
  int request_timeout_s = 120;
};

// OpenAI-style chat-completions client.  Retries connection failures,
// 5xx and 429 with exponential backoff (429 honours Retry-After); other
// 4xx fail immediately.  The API key is held in memory only and never
// logged or serialized.
class HttpProvider : public Provider {
 public:
  HttpProvider(std::string endpoint, std::string api_key,
               HttpOptions options = {});

  Completion complete(const std::vector<ChatMessage>& messages,
                      const GenerationConfig& config) override;
  const char* kind() const override { return "http"; }

 private:
  std::string base_;
  std::string path_;
  std::string api_key_;
  HttpOptions options_;
};

// Reads PROF_LLM_ENDPOINT / PROF_LLM_KEY from the environment.  Missing
// endpoint is a config error; the key may legitimately be empty for
// local gateways.
HttpProvider http_provider_from_env(HttpOptions options = {});

}  // namespace prof::llm
