#pragma once

#include <array>
#include <cstdint>

namespace prof {

// Philox4x32-10 counter-based generator.  Each (seed, stream) pair is an
// independent substream, so per-trajectory generation is reproducible
// regardless of generation order.
class Philox4x32 {
 public:
  Philox4x32(uint64_t seed, uint64_t stream);

  std::array<uint32_t, 4> next_block();

 private:
  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> counter_;
};

// Standard normal deviates via the Marsaglia polar method on top of a
// Philox substream.
class GaussianStream {
 public:
  GaussianStream(uint64_t seed, uint64_t stream) : rng_(seed, stream) {}

  double next();

 private:
  double next_uniform_signed();  // uniform in (-1, 1)

  Philox4x32 rng_;
  std::array<uint32_t, 4> block_{};
  int block_pos_ = 4;  // consumed
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace prof
