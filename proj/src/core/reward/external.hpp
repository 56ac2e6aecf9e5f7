#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "core/reward/reward.hpp"

namespace prof {

// Drives an external reward program over the prof-reward-v1 line protocol:
// parent sends {"hello":"prof-reward-v1","obs_dim":..,"act_dim":..}, child
// answers {"ready":true}; each transition is one request line
// {"obs":[..],"act":[..],"next":[..]} answered by {"reward": <number>}.
//
// Construction failures (spawn, bad handshake, handshake timeout) throw;
// per-transition failures come back as EvalOutcome errors.  After a
// timeout the child is killed and the session is unusable.
class ExternalReward {
 public:
  ExternalReward(std::vector<std::string> argv, int32_t obs_dim,
                 int32_t act_dim,
                 std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  ~ExternalReward();

  ExternalReward(const ExternalReward&) = delete;
  ExternalReward& operator=(const ExternalReward&) = delete;

  EvalOutcome evaluate(std::span<const double> obs,
                       std::span<const double> act,
                       std::span<const double> next);

  bool alive() const { return pid_ > 0; }

 private:
  std::string read_line(std::chrono::steady_clock::time_point deadline,
                        EvalErrorKind timeout_kind);
  bool write_all(const std::string& line);
  void shutdown(bool force);

  int32_t obs_dim_;
  int32_t act_dim_;
  std::chrono::milliseconds timeout_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string rx_buffer_;
};

}  // namespace prof
