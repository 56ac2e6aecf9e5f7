#include "core/llm/provider.hpp"

#include <fstream>

#include <json.hpp>

#include "core/sha256.hpp"

namespace prof::llm {

using nlohmann::json;

std::string request_digest(const std::vector<ChatMessage>& messages,
                           const GenerationConfig& config) {
  json req;
  json msgs = json::array();
  for (const auto& m : messages)
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  req["messages"] = std::move(msgs);
  req["temperature"] = config.temperature;
  req["max_output_tokens"] = config.max_output_tokens;
  req["top_p"] = config.top_p;
  req["model"] = config.model;
  return sha256_hex(req.dump());
}

ScriptProvider::ScriptProvider(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

ScriptProvider ScriptProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io, "cannot open script file " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_array())
    raise(Errc::format, "script file must be a JSON array of strings");
  std::vector<std::string> responses;
  for (const auto& item : doc) {
    if (!item.is_string())
      raise(Errc::format, "script file entries must be strings");
    responses.push_back(item.get<std::string>());
  }
  return ScriptProvider(std::move(responses));
}

Completion ScriptProvider::complete(const std::vector<ChatMessage>&,
                                    const GenerationConfig&) {
  if (next_ >= responses_.size())
    raise(Errc::script_exhausted,
          "script provider ran out of responses after " +
              std::to_string(next_));
  Completion c;
  c.text = responses_[next_++];
  return c;
}

}  // namespace prof::llm
