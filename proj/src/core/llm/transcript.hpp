#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "core/llm/provider.hpp"

namespace prof::llm {

// One request/response exchange in a JSON-lines transcript.  The request
// is stored in full (it is needed to re-derive the digest on load); API
// credentials never appear here.
struct TranscriptRecord {
  std::string digest;
  std::vector<ChatMessage> messages;
  GenerationConfig config;
  Completion completion;
  std::string provider;
  std::string timestamp;  // ISO-8601 UTC, informational only
};

class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::filesystem::path& path);
  void append(const TranscriptRecord& record);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

// Loads and digest-verifies a transcript.  A record whose stored digest
// does not match its request is rejected (format error).
std::vector<TranscriptRecord> load_transcript(const std::filesystem::path& path);

// Pass-through provider that appends every exchange to a transcript.
class RecordingProvider : public Provider {
 public:
  RecordingProvider(Provider& inner, TranscriptWriter& writer)
      : inner_(inner), writer_(writer) {}

  Completion complete(const std::vector<ChatMessage>& messages,
                      const GenerationConfig& config) override;
  const char* kind() const override { return inner_.kind(); }

 private:
  Provider& inner_;
  TranscriptWriter& writer_;
};

// Replays a recorded transcript.  Identical requests form a FIFO queue
// per digest, so repeated sampling of one prompt replays in recorded
// order.  An unknown digest or an exhausted queue is a replay miss.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::filesystem::path& path);

  Completion complete(const std::vector<ChatMessage>& messages,
                      const GenerationConfig& config) override;
  const char* kind() const override { return "replay"; }

 private:
  struct Queue {
    std::vector<Completion> items;
    size_t next = 0;
  };
  std::map<std::string, Queue> queues_;
};

}  // namespace prof::llm
