#include "core/rng.hpp"

#include <cmath>

namespace prof {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr uint32_t kWeyl0 = 0x9E3779B9;  // golden ratio
constexpr uint32_t kWeyl1 = 0xBB67AE85;  // sqrt(3) - 1

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  uint64_t p = uint64_t(a) * uint64_t(b);
  hi = uint32_t(p >> 32);
  lo = uint32_t(p);
}

}  // namespace

Philox4x32::Philox4x32(uint64_t seed, uint64_t stream) {
  key_ = {uint32_t(seed), uint32_t(seed >> 32)};
  counter_ = {0, 0, uint32_t(stream), uint32_t(stream >> 32)};
}

std::array<uint32_t, 4> Philox4x32::next_block() {
  std::array<uint32_t, 4> ctr = counter_;
  std::array<uint32_t, 2> key = key_;
  for (int round = 0; round < 10; ++round) {
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  // 128-bit counter increment; the stream id occupies the high words, so a
  // single substream would need 2^64 blocks to collide with the next one.
  if (++counter_[0] == 0 && ++counter_[1] == 0 && ++counter_[2] == 0)
    ++counter_[3];
  return ctr;
}

double GaussianStream::next_uniform_signed() {
  if (block_pos_ >= 4) {
    block_ = rng_.next_block();
    block_pos_ = 0;
  }
  uint32_t hi = block_[block_pos_++];
  if (block_pos_ >= 4) {
    block_ = rng_.next_block();
    block_pos_ = 0;
  }
  uint32_t lo = block_[block_pos_++];
  uint64_t bits = (uint64_t(hi) << 32) | lo;
  double u = double(bits >> 11) * 0x1.0p-53;  // [0, 1)
  return 2.0 * u - 1.0;
}

double GaussianStream::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  for (;;) {
    double x = next_uniform_signed();
    double y = next_uniform_signed();
    double s = x * x + y * y;
    if (s >= 1.0 || s == 0.0) continue;
    double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = y * m;
    has_cached_ = true;
    return x * m;
  }
}

}  // namespace prof
