#pragma once

#include <optional>

#include "core/llm/provider.hpp"
#include "core/reward/reward.hpp"

namespace prof::llm {

struct SamplingContext {
  Arity arity = Arity::kSas;
  int32_t obs_dim = 0;
  int32_t act_dim = 0;
  int32_t step_budget = kDefaultStepBudget;
};

struct SampledCandidate {
  int slot = 0;
  std::string response_text;                // last raw completion
  std::optional<CompiledReward> compiled;   // present iff the slot succeeded
  std::string failure;                      // last extract/parse failure
  int attempts = 0;

  bool ok() const { return compiled.has_value(); }
};

struct SampleRun {
  std::vector<SampledCandidate> candidates;  // one per slot
  UsageTotals usage;
};

// Draws n candidate programs from one prompt.  A completion whose code
// fails to extract or compile is retried (retry_budget extra attempts per
// slot); a slot that never yields a program is reported, not fatal.
// Provider failures propagate.
SampleRun sample_candidates(Provider& provider,
                            const std::vector<ChatMessage>& prompt, int n,
                            const GenerationConfig& config,
                            const SamplingContext& context, int retry_budget);

// One attempt worth of post-processing: extract + compile.
CompiledReward compile_response(const std::string& response_text,
                                const SamplingContext& context);

}  // namespace prof::llm
