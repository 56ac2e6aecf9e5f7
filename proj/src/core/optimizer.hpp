#pragma once

#include <functional>
#include <optional>

#include "core/llm/provider.hpp"
#include "core/llm/sampling.hpp"
#include "core/prompt.hpp"
#include "core/rpr.hpp"

namespace prof {

struct OptimizeConfig {
  int n = 5;             // candidates sampled per round
  int rounds = 1;        // refinement rounds after the initial generation
  int retry_budget = 2;  // extra attempts per slot on extract/parse failure
  RprConfig rpr;
  llm::GenerationConfig gen;
  Arity arity = Arity::kSas;
  int32_t step_budget = kDefaultStepBudget;
};

// Append-only candidate buffer entry; ids are assigned in creation order
// and never reused.
struct BufferEntry {
  int id = 0;
  int round = 0;  // 0 = initial generation, then 1..T
  int slot = 0;
  RewardSource source;
  CompiledReward compiled;
  DominanceReport report;
  std::string response_text;
};

// Everything one slot produced, for artifact persistence.  Chain fields
// are empty during initial generation and degraded rounds.
struct SlotOutcome {
  int slot = 0;
  bool accepted = false;
  std::optional<int> entry_id;
  std::string failure;  // extract/parse failure when not accepted
  int attempts = 0;
  std::string response_text;
  std::string candidate_source;
  std::optional<DominanceReport> report;
  std::string loss_prompt, loss_response;
  std::string grad_prompt, grad_response;
  std::string update_prompt;
};

struct RoundOutcome {
  int round = 0;
  bool degraded = false;  // buffer had no valid pair; fell back to fresh sampling
  int chosen_id = -1;
  int rejected_id = -1;
  std::vector<SlotOutcome> slots;
};

struct OptimizeResult {
  std::vector<BufferEntry> buffer;
  std::vector<RoundOutcome> rounds;  // index 0 is the initial generation
  int best_id = -1;
  llm::UsageTotals usage;
};

// Called after each round with its outcome; lets the pipeline write
// artifacts incrementally.
using RoundSink = std::function<void(const RoundOutcome&)>;

// Generate-score-refine loop: sample n candidates, score each against
// offline/expert/noisy, then per round pick the best and worst buffer
// entries and ask the provider to improve the best via the
// loss/grad/update chain.  Throws no_valid_candidates when the initial
// generation yields nothing scoreable.
OptimizeResult optimize(llm::Provider& provider, const PromptBundle& bundle,
                        const PromptTemplates& templates,
                        const Dataset& offline, const Dataset& expert,
                        const NoisySet& noisy, const OptimizeConfig& config,
                        const RoundSink& sink = {});

}  // namespace prof
