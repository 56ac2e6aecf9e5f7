#include "core/error.hpp"

namespace prof {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::ok: return "ok";
    case Errc::io: return "io";
    case Errc::format: return "format";
    case Errc::dimension: return "dimension";
    case Errc::non_finite: return "non_finite";
    case Errc::validation: return "validation";
    case Errc::missing_rewards: return "missing_rewards";
    case Errc::k_too_large: return "k_too_large";
    case Errc::parse: return "parse";
    case Errc::arity: return "arity";
    case Errc::bounds: return "bounds";
    case Errc::extraction: return "extraction";
    case Errc::eval: return "eval";
    case Errc::budget: return "budget";
    case Errc::spawn: return "spawn";
    case Errc::protocol: return "protocol";
    case Errc::timeout: return "timeout";
    case Errc::transport: return "transport";
    case Errc::rate_limited: return "rate_limited";
    case Errc::replay_miss: return "replay_miss";
    case Errc::script_exhausted: return "script_exhausted";
    case Errc::placeholder: return "placeholder";
    case Errc::all_invalid: return "all_invalid";
    case Errc::no_valid_candidates: return "no_valid_candidates";
    case Errc::config: return "config";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::internal: return "internal";
  }
  return "unknown";
}

}  // namespace prof
