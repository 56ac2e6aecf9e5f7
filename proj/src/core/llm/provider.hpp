#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace prof::llm {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

struct GenerationConfig {
  double temperature = 0.7;
  int32_t max_output_tokens = 10000;
  double top_p = 1.0;
  std::string model;
};

struct Completion {
  std::string text;
  int64_t prompt_tokens = 0;
  int64_t completion_tokens = 0;
};

struct UsageTotals {
  int64_t requests = 0;
  int64_t prompt_tokens = 0;
  int64_t completion_tokens = 0;

  void add(const Completion& c) {
    ++requests;
    prompt_tokens += c.prompt_tokens;
    completion_tokens += c.completion_tokens;
  }
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual Completion complete(const std::vector<ChatMessage>& messages,
                              const GenerationConfig& config) = 0;
  virtual const char* kind() const = 0;
};

// Canonical request fingerprint: sha256 over a sorted-key JSON encoding
// of (messages, generation settings).  Credentials and endpoints are
// deliberately excluded.
std::string request_digest(const std::vector<ChatMessage>& messages,
                           const GenerationConfig& config);

// Fixed sequence of canned responses; each complete() pops the next one.
class ScriptProvider : public Provider {
 public:
  explicit ScriptProvider(std::vector<std::string> responses);
  static ScriptProvider from_file(const std::string& path);

  Completion complete(const std::vector<ChatMessage>& messages,
                      const GenerationConfig& config) override;
  const char* kind() const override { return "script"; }
  size_t remaining() const { return responses_.size() - next_; }

 private:
  std::vector<std::string> responses_;
  size_t next_ = 0;
};

}  // namespace prof::llm
