#pragma once

#include <stdexcept>
#include <string>

namespace prof {

// Error taxonomy shared by every module.  Each code maps 1:1 onto a
// prof_status value in the public C header.
enum class Errc {
  ok = 0,
  io,
  format,
  dimension,
  non_finite,
  validation,
  missing_rewards,
  k_too_large,
  parse,
  arity,
  bounds,
  extraction,
  eval,
  budget,
  spawn,
  protocol,
  timeout,
  transport,
  rate_limited,
  replay_miss,
  script_exhausted,
  placeholder,
  all_invalid,
  no_valid_candidates,
  config,
  invalid_argument,
  internal,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, std::string message) {
  throw Error(code, std::move(message));
}

}  // namespace prof
