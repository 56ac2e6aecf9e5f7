/* prof: reward generation, ranking and relabeling for offline imitation
 * datasets.  C ABI over the C++ core; every handle is opaque and every
 * call reports failure through a prof_status plus prof_last_error().
 *
 * Strings returned through char** out-parameters are heap-allocated and
 * must be released with prof_string_free().  Handles are released with
 * their matching *_free(); all free functions accept NULL. */
#ifndef PROF_H
#define PROF_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef PROF_API
#if defined(_WIN32)
#define PROF_API __declspec(dllexport)
#else
#define PROF_API __attribute__((visibility("default")))
#endif
#endif

typedef enum prof_status {
  PROF_OK = 0,
  PROF_ERR_IO,
  PROF_ERR_FORMAT,
  PROF_ERR_DIMENSION,
  PROF_ERR_NON_FINITE,
  PROF_ERR_VALIDATION,
  PROF_ERR_MISSING_REWARDS,
  PROF_ERR_K_TOO_LARGE,
  PROF_ERR_PARSE,
  PROF_ERR_ARITY,
  PROF_ERR_BOUNDS,
  PROF_ERR_EXTRACTION,
  PROF_ERR_EVAL,
  PROF_ERR_BUDGET,
  PROF_ERR_SPAWN,
  PROF_ERR_PROTOCOL,
  PROF_ERR_TIMEOUT,
  PROF_ERR_TRANSPORT,
  PROF_ERR_RATE_LIMITED,
  PROF_ERR_REPLAY_MISS,
  PROF_ERR_SCRIPT_EXHAUSTED,
  PROF_ERR_PLACEHOLDER,
  PROF_ERR_ALL_INVALID,
  PROF_ERR_NO_VALID_CANDIDATES,
  PROF_ERR_CONFIG,
  PROF_ERR_INVALID_ARGUMENT,
  PROF_ERR_INTERNAL
} prof_status;

typedef struct prof_dataset prof_dataset;
typedef struct prof_reward prof_reward;
typedef struct prof_noisy prof_noisy;

PROF_API const char* prof_version(void);
PROF_API const char* prof_status_name(prof_status status);

/* CLI exit-code convention: 0 ok, 2 config, 3 data, 4 provider/external,
 * 5 no usable candidate, 1 anything else. */
PROF_API int prof_exit_code(prof_status status);

/* Message for the most recent failure on this thread. */
PROF_API const char* prof_last_error(void);

PROF_API void prof_string_free(char* s);

/* --- datasets ---------------------------------------------------------- */

/* format: "auto", "binary-v1" or "text-lines"; NULL means "auto". */
PROF_API prof_status prof_dataset_load(const char* path, const char* format,
                                       prof_dataset** out);
PROF_API prof_status prof_dataset_save(const prof_dataset* dataset,
                                       const char* path, const char* format);
PROF_API void prof_dataset_free(prof_dataset* dataset);

PROF_API int64_t prof_dataset_count(const prof_dataset* dataset);
PROF_API int32_t prof_dataset_obs_dim(const prof_dataset* dataset);
PROF_API int32_t prof_dataset_act_dim(const prof_dataset* dataset);
PROF_API int prof_dataset_has_rewards(const prof_dataset* dataset);

/* Stored return of one trajectory. */
PROF_API prof_status prof_dataset_return(const prof_dataset* dataset,
                                         int64_t index, double* out);

/* Expert subset by highest stored return (ties keep the lower index). */
PROF_API prof_status prof_dataset_select_expert(const prof_dataset* dataset,
                                                int64_t expert_count,
                                                prof_dataset** expert_out);

/* --- reward programs --------------------------------------------------- */

/* arity: "sas" (obs, act, next) or "ss" (obs, next).  step_budget <= 0
 * selects the default (10000). */
PROF_API prof_status prof_reward_compile(const char* text, const char* arity,
                                         int32_t obs_dim, int32_t act_dim,
                                         int32_t step_budget,
                                         prof_reward** out);
PROF_API void prof_reward_free(prof_reward* reward);

/* obs/next have obs_dim elements; act has act_dim and may be NULL when
 * act_dim is 0 or the reward is state-only. */
PROF_API prof_status prof_reward_eval(const prof_reward* reward,
                                      const double* obs, const double* act,
                                      const double* next, double* out);

PROF_API prof_status prof_reward_render(const prof_reward* reward, char** out);

/* Last usable fenced code block of an LLM response. */
PROF_API prof_status prof_extract_code_block(const char* response, char** out);

/* --- noisy sets --------------------------------------------------------- */

/* Builds h_count noise-perturbed copies of the lowest-return trajectory
 * in `expert`. */
PROF_API prof_status prof_noisy_synthesize(const prof_dataset* expert,
                                           double alpha_o, double alpha_a,
                                           int64_t h_count, uint64_t seed,
                                           prof_noisy** out);
PROF_API void prof_noisy_free(prof_noisy* noisy);
PROF_API int64_t prof_noisy_count(const prof_noisy* noisy);
PROF_API prof_status prof_noisy_save(const prof_noisy* noisy,
                                     const char* path);
PROF_API prof_status prof_noisy_digest(const prof_noisy* noisy, char** out);

/* --- scoring and relabeling --------------------------------------------- */

/* Dominance score of one reward; returns the score report as JSON
 * {id, lambda, frac_offline, frac_noisy, score, valid, failure, wall_ms}. */
PROF_API prof_status prof_dominance_score(const prof_reward* reward,
                                          const prof_dataset* offline,
                                          const prof_dataset* expert,
                                          const prof_noisy* noisy,
                                          double delta, char** report_out);

/* Relabels the dataset with the reward, min-max rescales onto
 * [r_min, r_max] and writes the result. */
PROF_API prof_status prof_relabel(const prof_dataset* dataset,
                                  const prof_reward* reward, double r_min,
                                  double r_max, const char* out_path,
                                  const char* format);

/* --- pipeline stages ----------------------------------------------------- */

/* stage: split | noise | score | optimize | relabel | run.
 * config_json: flat configuration object (see README).  On success the
 * stage report JSON is returned through report_out. */
PROF_API prof_status prof_run_stage(const char* stage, const char* config_json,
                                    char** report_out);

#ifdef __cplusplus
}
#endif

#endif /* PROF_H */
