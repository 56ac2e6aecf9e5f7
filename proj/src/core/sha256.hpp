#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace prof {

// Streaming SHA-256.  Used for content digests (noisy sets, artifacts,
// replay request keys); not a security boundary.
class Sha256 {
 public:
  Sha256() { reset(); }

  void reset();
  void update(const void* data, size_t len);
  void update(std::string_view s) { update(s.data(), s.size()); }

  // Finalizes and returns the digest; the object must be reset() before
  // further use.
  std::array<uint8_t, 32> finish();
  std::string finish_hex();

 private:
  void process_block(const uint8_t* block);

  std::array<uint32_t, 8> state_;
  uint64_t total_len_ = 0;
  std::array<uint8_t, 64> buffer_;
  size_t buffer_len_ = 0;
};

std::string sha256_hex(std::string_view data);
std::string to_hex(const uint8_t* data, size_t len);

}  // namespace prof
