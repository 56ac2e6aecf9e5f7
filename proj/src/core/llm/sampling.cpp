#include "core/llm/sampling.hpp"

namespace prof::llm {

CompiledReward compile_response(const std::string& response_text,
                                const SamplingContext& context) {
  RewardSource source{extract_code_block(response_text), context.arity};
  return parse_reward(source, context.obs_dim, context.act_dim,
                      context.step_budget);
}

SampleRun sample_candidates(Provider& provider,
                            const std::vector<ChatMessage>& prompt, int n,
                            const GenerationConfig& config,
                            const SamplingContext& context, int retry_budget) {
  if (n < 1) raise(Errc::validation, "candidate count must be >= 1");
  if (retry_budget < 0) raise(Errc::validation, "retry budget must be >= 0");

  SampleRun run;
  for (int slot = 0; slot < n; ++slot) {
    SampledCandidate candidate;
    candidate.slot = slot;
    for (int attempt = 0; attempt <= retry_budget; ++attempt) {
      Completion completion = provider.complete(prompt, config);
      run.usage.add(completion);
      candidate.attempts = attempt + 1;
      candidate.response_text = completion.text;
      try {
        candidate.compiled = compile_response(completion.text, context);
        candidate.failure.clear();
        break;
      } catch (const Error& e) {
        if (e.code() != Errc::extraction && e.code() != Errc::parse &&
            e.code() != Errc::bounds && e.code() != Errc::arity)
          throw;
        candidate.failure = std::string(errc_name(e.code())) + ": " + e.what();
      }
    }
    run.candidates.push_back(std::move(candidate));
  }
  return run;
}

}  // namespace prof::llm
