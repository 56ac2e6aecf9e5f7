#include "core/llm/transcript.hpp"

#include <ctime>

#include <json.hpp>

namespace prof::llm {
namespace {

using nlohmann::json;

json record_to_json(const TranscriptRecord& r) {
  json msgs = json::array();
  for (const auto& m : r.messages)
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  return json{
      {"digest", r.digest},
      {"request",
       {{"messages", std::move(msgs)},
        {"temperature", r.config.temperature},
        {"max_output_tokens", r.config.max_output_tokens},
        {"top_p", r.config.top_p},
        {"model", r.config.model}}},
      {"response",
       {{"text", r.completion.text},
        {"prompt_tokens", r.completion.prompt_tokens},
        {"completion_tokens", r.completion.completion_tokens}}},
      {"provider", r.provider},
      {"timestamp", r.timestamp},
  };
}

TranscriptRecord record_from_json(const json& j, int64_t line_no) {
  auto bad = [&](const std::string& why) {
    raise(Errc::format,
          "transcript line " + std::to_string(line_no) + ": " + why);
  };
  if (!j.is_object() || !j.contains("digest") || !j.contains("request") ||
      !j.contains("response"))
    bad("record needs digest, request and response");
  TranscriptRecord r;
  r.digest = j["digest"].get<std::string>();
  const json& req = j["request"];
  if (!req.contains("messages") || !req["messages"].is_array())
    bad("request.messages missing");
  for (const auto& m : req["messages"])
    r.messages.push_back(ChatMessage{m.at("role").get<std::string>(),
                                     m.at("content").get<std::string>()});
  r.config.temperature = req.value("temperature", 0.7);
  r.config.max_output_tokens = req.value("max_output_tokens", 10000);
  r.config.top_p = req.value("top_p", 1.0);
  r.config.model = req.value("model", std::string());
  const json& resp = j["response"];
  r.completion.text = resp.value("text", std::string());
  r.completion.prompt_tokens = resp.value("prompt_tokens", int64_t(0));
  r.completion.completion_tokens = resp.value("completion_tokens", int64_t(0));
  r.provider = j.value("provider", std::string());
  r.timestamp = j.value("timestamp", std::string());
  return r;
}

std::string utc_now_iso8601() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc;
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path)
    : path_(path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) raise(Errc::io, "cannot open transcript " + path.string());
}

void TranscriptWriter::append(const TranscriptRecord& record) {
  out_ << record_to_json(record).dump() << '\n';
  out_.flush();
  if (!out_) raise(Errc::io, "failed writing transcript " + path_.string());
}

std::vector<TranscriptRecord> load_transcript(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io, "cannot open transcript " + path.string());
  std::vector<TranscriptRecord> records;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      raise(Errc::format,
            "transcript line " + std::to_string(line_no) + ": invalid JSON");
    TranscriptRecord r = record_from_json(j, line_no);
    std::string expect = request_digest(r.messages, r.config);
    if (expect != r.digest)
      raise(Errc::format, "transcript line " + std::to_string(line_no) +
                              ": digest mismatch (file " +
                              r.digest.substr(0, 12) + ", computed " +
                              expect.substr(0, 12) + ")");
    records.push_back(std::move(r));
  }
  return records;
}

Completion RecordingProvider::complete(
    const std::vector<ChatMessage>& messages, const GenerationConfig& config) {
  Completion c = inner_.complete(messages, config);
  TranscriptRecord record;
  record.digest = request_digest(messages, config);
  record.messages = messages;
  record.config = config;
  record.completion = c;
  record.provider = inner_.kind();
  record.timestamp = utc_now_iso8601();
  writer_.append(record);
  return c;
}

ReplayProvider::ReplayProvider(const std::filesystem::path& path) {
  for (auto& record : load_transcript(path))
    queues_[record.digest].items.push_back(std::move(record.completion));
}

Completion ReplayProvider::complete(const std::vector<ChatMessage>& messages,
                                    const GenerationConfig& config) {
  std::string digest = request_digest(messages, config);
  auto it = queues_.find(digest);
  if (it == queues_.end())
    raise(Errc::replay_miss,
          "no transcript entry for request digest " + digest.substr(0, 12));
  Queue& q = it->second;
  if (q.next >= q.items.size())
    raise(Errc::replay_miss, "transcript entries for request digest " +
                                 digest.substr(0, 12) + " are exhausted (" +
                                 std::to_string(q.items.size()) + " used)");
  return q.items[q.next++];
}

}  // namespace prof::llm
