#include "prof/prof.h"

#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "core/noise.hpp"
#include "core/pipeline.hpp"
#include "core/relabel.hpp"
#include "core/rpr.hpp"
#include "core/trajectory_io.hpp"

using nlohmann::json;

struct prof_dataset {
  prof::Dataset value;
};
struct prof_reward {
  prof::CompiledReward value;
};
struct prof_noisy {
  prof::NoisySet value;
};

namespace {

thread_local std::string g_last_error;

prof_status status_from(prof::Errc code) {
  using prof::Errc;
  switch (code) {
    case Errc::ok: return PROF_OK;
    case Errc::io: return PROF_ERR_IO;
    case Errc::format: return PROF_ERR_FORMAT;
    case Errc::dimension: return PROF_ERR_DIMENSION;
    case Errc::non_finite: return PROF_ERR_NON_FINITE;
    case Errc::validation: return PROF_ERR_VALIDATION;
    case Errc::missing_rewards: return PROF_ERR_MISSING_REWARDS;
    case Errc::k_too_large: return PROF_ERR_K_TOO_LARGE;
    case Errc::parse: return PROF_ERR_PARSE;
    case Errc::arity: return PROF_ERR_ARITY;
    case Errc::bounds: return PROF_ERR_BOUNDS;
    case Errc::extraction: return PROF_ERR_EXTRACTION;
    case Errc::eval: return PROF_ERR_EVAL;
    case Errc::budget: return PROF_ERR_BUDGET;
    case Errc::spawn: return PROF_ERR_SPAWN;
    case Errc::protocol: return PROF_ERR_PROTOCOL;
    case Errc::timeout: return PROF_ERR_TIMEOUT;
    case Errc::transport: return PROF_ERR_TRANSPORT;
    case Errc::rate_limited: return PROF_ERR_RATE_LIMITED;
    case Errc::replay_miss: return PROF_ERR_REPLAY_MISS;
    case Errc::script_exhausted: return PROF_ERR_SCRIPT_EXHAUSTED;
    case Errc::placeholder: return PROF_ERR_PLACEHOLDER;
    case Errc::all_invalid: return PROF_ERR_ALL_INVALID;
    case Errc::no_valid_candidates: return PROF_ERR_NO_VALID_CANDIDATES;
    case Errc::config: return PROF_ERR_CONFIG;
    case Errc::invalid_argument: return PROF_ERR_INVALID_ARGUMENT;
    case Errc::internal: return PROF_ERR_INTERNAL;
  }
  return PROF_ERR_INTERNAL;
}

prof_status fail(prof_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

prof_status fail_invalid(const char* message) {
  return fail(PROF_ERR_INVALID_ARGUMENT, message);
}

// Runs `body` translating exceptions into status codes.
template <typename Fn>
prof_status guarded(Fn&& body) {
  try {
    return body();
  } catch (const prof::Error& e) {
    return fail(status_from(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PROF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PROF_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

prof_status eval_status(prof::EvalErrorKind kind) {
  using prof::EvalErrorKind;
  switch (kind) {
    case EvalErrorKind::kNonFinite: return PROF_ERR_NON_FINITE;
    case EvalErrorKind::kBudgetExceeded: return PROF_ERR_BUDGET;
    case EvalErrorKind::kSpawn: return PROF_ERR_SPAWN;
    case EvalErrorKind::kProtocol: return PROF_ERR_PROTOCOL;
    case EvalErrorKind::kTimeout: return PROF_ERR_TIMEOUT;
  }
  return PROF_ERR_INTERNAL;
}

}  // namespace

extern "C" {

const char* prof_version(void) { return "0.1.0"; }

const char* prof_status_name(prof_status status) {
  switch (status) {
    case PROF_OK: return "ok";
    case PROF_ERR_IO: return "io";
    case PROF_ERR_FORMAT: return "format";
    case PROF_ERR_DIMENSION: return "dimension";
    case PROF_ERR_NON_FINITE: return "non_finite";
    case PROF_ERR_VALIDATION: return "validation";
    case PROF_ERR_MISSING_REWARDS: return "missing_rewards";
    case PROF_ERR_K_TOO_LARGE: return "k_too_large";
    case PROF_ERR_PARSE: return "parse";
    case PROF_ERR_ARITY: return "arity";
    case PROF_ERR_BOUNDS: return "bounds";
    case PROF_ERR_EXTRACTION: return "extraction";
    case PROF_ERR_EVAL: return "eval";
    case PROF_ERR_BUDGET: return "budget";
    case PROF_ERR_SPAWN: return "spawn";
    case PROF_ERR_PROTOCOL: return "protocol";
    case PROF_ERR_TIMEOUT: return "timeout";
    case PROF_ERR_TRANSPORT: return "transport";
    case PROF_ERR_RATE_LIMITED: return "rate_limited";
    case PROF_ERR_REPLAY_MISS: return "replay_miss";
    case PROF_ERR_SCRIPT_EXHAUSTED: return "script_exhausted";
    case PROF_ERR_PLACEHOLDER: return "placeholder";
    case PROF_ERR_ALL_INVALID: return "all_invalid";
    case PROF_ERR_NO_VALID_CANDIDATES: return "no_valid_candidates";
    case PROF_ERR_CONFIG: return "config";
    case PROF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PROF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

int prof_exit_code(prof_status status) {
  switch (status) {
    case PROF_OK:
      return 0;
    case PROF_ERR_CONFIG:
    case PROF_ERR_PLACEHOLDER:
      return 2;
    case PROF_ERR_IO:
    case PROF_ERR_FORMAT:
    case PROF_ERR_DIMENSION:
    case PROF_ERR_NON_FINITE:
    case PROF_ERR_VALIDATION:
    case PROF_ERR_MISSING_REWARDS:
    case PROF_ERR_K_TOO_LARGE:
    case PROF_ERR_PARSE:
    case PROF_ERR_ARITY:
    case PROF_ERR_BOUNDS:
    case PROF_ERR_EXTRACTION:
    case PROF_ERR_EVAL:
    case PROF_ERR_BUDGET:
      return 3;
    case PROF_ERR_SPAWN:
    case PROF_ERR_PROTOCOL:
    case PROF_ERR_TIMEOUT:
    case PROF_ERR_TRANSPORT:
    case PROF_ERR_RATE_LIMITED:
    case PROF_ERR_REPLAY_MISS:
    case PROF_ERR_SCRIPT_EXHAUSTED:
      return 4;
    case PROF_ERR_ALL_INVALID:
    case PROF_ERR_NO_VALID_CANDIDATES:
      return 5;
    default:
      return 1;
  }
}

const char* prof_last_error(void) { return g_last_error.c_str(); }

void prof_string_free(char* s) { delete[] s; }

prof_status prof_dataset_load(const char* path, const char* format,
                              prof_dataset** out) {
  if (!path || !out) return fail_invalid("path and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    prof::DatasetFormat fmt =
        prof::dataset_format_from_name(format ? format : "auto");
    *out = new prof_dataset{prof::load_dataset(path, fmt)};
    return PROF_OK;
  });
}

prof_status prof_dataset_save(const prof_dataset* dataset, const char* path,
                              const char* format) {
  if (!dataset || !path) return fail_invalid("dataset and path must not be NULL");
  return guarded([&] {
    prof::DatasetFormat fmt =
        prof::dataset_format_from_name(format ? format : "binary-v1");
    prof::save_dataset(dataset->value, path, fmt);
    return PROF_OK;
  });
}

void prof_dataset_free(prof_dataset* dataset) { delete dataset; }

int64_t prof_dataset_count(const prof_dataset* dataset) {
  return dataset ? dataset->value.size() : 0;
}

int32_t prof_dataset_obs_dim(const prof_dataset* dataset) {
  return dataset ? dataset->value.obs_dim() : 0;
}

int32_t prof_dataset_act_dim(const prof_dataset* dataset) {
  return dataset ? dataset->value.act_dim() : 0;
}

int prof_dataset_has_rewards(const prof_dataset* dataset) {
  return dataset && dataset->value.has_rewards() ? 1 : 0;
}

prof_status prof_dataset_return(const prof_dataset* dataset, int64_t index,
                                double* out) {
  if (!dataset || !out) return fail_invalid("dataset and out must not be NULL");
  return guarded([&] {
    *out = prof::compute_return(dataset->value.at(index));
    return PROF_OK;
  });
}

prof_status prof_dataset_select_expert(const prof_dataset* dataset,
                                       int64_t expert_count,
                                       prof_dataset** expert_out) {
  if (!dataset || !expert_out)
    return fail_invalid("dataset and expert_out must not be NULL");
  *expert_out = nullptr;
  return guarded([&] {
    prof::SplitSpec spec;
    spec.expert_count = expert_count;
    prof::SplitResult split = prof::select_expert(dataset->value, spec);
    *expert_out = new prof_dataset{std::move(split.expert)};
    return PROF_OK;
  });
}

prof_status prof_reward_compile(const char* text, const char* arity,
                                int32_t obs_dim, int32_t act_dim,
                                int32_t step_budget, prof_reward** out) {
  if (!text || !out) return fail_invalid("text and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    prof::RewardSource source{text,
                              prof::arity_from_name(arity ? arity : "sas")};
    int32_t budget = step_budget > 0 ? step_budget : prof::kDefaultStepBudget;
    *out = new prof_reward{
        prof::parse_reward(source, obs_dim, act_dim, budget)};
    return PROF_OK;
  });
}

void prof_reward_free(prof_reward* reward) { delete reward; }

prof_status prof_reward_eval(const prof_reward* reward, const double* obs,
                             const double* act, const double* next,
                             double* out) {
  if (!reward || !obs || !next || !out)
    return fail_invalid("reward, obs, next and out must not be NULL");
  size_t obs_dim = size_t(reward->value.obs_dim());
  size_t act_dim = size_t(reward->value.act_dim());
  if (!act && act_dim > 0 && reward->value.arity() == prof::Arity::kSas)
    return fail_invalid("act must not be NULL for a sas reward");
  return guarded([&] {
    std::span<const double> act_span =
        act ? std::span<const double>(act, act_dim) : std::span<const double>();
    prof::EvalOutcome result = reward->value.evaluate(
        std::span<const double>(obs, obs_dim), act_span,
        std::span<const double>(next, obs_dim));
    if (!result.ok())
      return fail(eval_status(result.error_kind()),
                  std::string("evaluation failed: ") +
                      prof::eval_error_name(result.error_kind()));
    *out = result.value();
    return PROF_OK;
  });
}

prof_status prof_reward_render(const prof_reward* reward, char** out) {
  if (!reward || !out) return fail_invalid("reward and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(reward->value.render());
    return PROF_OK;
  });
}

prof_status prof_extract_code_block(const char* response, char** out) {
  if (!response || !out) return fail_invalid("response and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(prof::extract_code_block(response));
    return PROF_OK;
  });
}

prof_status prof_noisy_synthesize(const prof_dataset* expert, double alpha_o,
                                  double alpha_a, int64_t h_count,
                                  uint64_t seed, prof_noisy** out) {
  if (!expert || !out) return fail_invalid("expert and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    int64_t min_idx = prof::min_return_index(expert->value);
    prof::NoiseConfig config{alpha_o, alpha_a, h_count, seed};
    *out = new prof_noisy{
        prof::synthesize_noisy(expert->value.at(min_idx), config)};
    return PROF_OK;
  });
}

void prof_noisy_free(prof_noisy* noisy) { delete noisy; }

int64_t prof_noisy_count(const prof_noisy* noisy) {
  return noisy ? noisy->value.size() : 0;
}

prof_status prof_noisy_save(const prof_noisy* noisy, const char* path) {
  if (!noisy || !path) return fail_invalid("noisy and path must not be NULL");
  return guarded([&] {
    prof::save_dataset(prof::Dataset(noisy->value.trajectories()), path,
                       prof::DatasetFormat::kBinaryV1);
    return PROF_OK;
  });
}

prof_status prof_noisy_digest(const prof_noisy* noisy, char** out) {
  if (!noisy || !out) return fail_invalid("noisy and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(noisy->value.digest());
    return PROF_OK;
  });
}

prof_status prof_dominance_score(const prof_reward* reward,
                                 const prof_dataset* offline,
                                 const prof_dataset* expert,
                                 const prof_noisy* noisy, double delta,
                                 char** report_out) {
  if (!reward || !offline || !expert || !noisy || !report_out)
    return fail_invalid("all arguments must not be NULL");
  *report_out = nullptr;
  return guarded([&] {
    prof::DominanceReport report =
        prof::dominance_score(reward->value, offline->value, expert->value,
                              noisy->value, prof::RprConfig{delta});
    *report_out = dup_string(prof::report_to_json(0, report, true).dump());
    return PROF_OK;
  });
}

prof_status prof_relabel(const prof_dataset* dataset,
                         const prof_reward* reward, double r_min, double r_max,
                         const char* out_path, const char* format) {
  if (!dataset || !reward || !out_path)
    return fail_invalid("dataset, reward and out_path must not be NULL");
  return guarded([&] {
    auto raw = prof::relabel(dataset->value, reward->value);
    auto scaled = prof::rescale(raw, prof::ScaleBounds{r_min, r_max});
    prof::Dataset labeled = prof::with_rewards(dataset->value, scaled);
    prof::DatasetFormat fmt =
        prof::dataset_format_from_name(format ? format : "binary-v1");
    prof::save_dataset(labeled, out_path, fmt);
    return PROF_OK;
  });
}

prof_status prof_run_stage(const char* stage, const char* config_json,
                           char** report_out) {
  if (!stage || !config_json || !report_out)
    return fail_invalid("stage, config_json and report_out must not be NULL");
  *report_out = nullptr;
  return guarded([&] {
    json doc = json::parse(config_json, nullptr, false);
    if (doc.is_discarded())
      return fail(PROF_ERR_CONFIG, "config is not valid JSON");
    *report_out = dup_string(prof::run_stage(stage, doc).dump(2));
    return PROF_OK;
  });
}

}  // extern "C"
