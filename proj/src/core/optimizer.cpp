#include "core/optimizer.hpp"

namespace prof {
namespace {

class Loop {
 public:
  Loop(llm::Provider& provider, const PromptBundle& bundle,
       const PromptTemplates& templates, const Dataset& offline,
       const Dataset& expert, const NoisySet& noisy,
       const OptimizeConfig& config, const RoundSink& sink)
      : provider_(provider),
        templates_(templates),
        offline_(offline),
        expert_(expert),
        noisy_(noisy),
        config_(config),
        sink_(sink),
        query_(build_query(bundle)) {
    if (config.n < 1) raise(Errc::validation, "n must be >= 1");
    if (config.rounds < 0) raise(Errc::validation, "rounds must be >= 0");
    context_ = llm::SamplingContext{config.arity, offline.obs_dim(),
                                    offline.act_dim(), config.step_budget};
  }

  OptimizeResult run() {
    initial_generation();
    for (int round = 1; round <= config_.rounds; ++round) refine_round(round);

    int best = -1;
    double best_score = 0.0;
    for (const auto& entry : result_.buffer) {
      if (!entry.report.valid) continue;
      if (best < 0 || entry.report.score > best_score) {
        best = entry.id;
        best_score = entry.report.score;
      }
    }
    result_.best_id = best;
    return std::move(result_);
  }

 private:
  // Scores a parsed candidate and appends it to the buffer.
  const BufferEntry& admit(int round, const llm::SampledCandidate& candidate) {
    DominanceReport report = dominance_score(*candidate.compiled, offline_,
                                             expert_, noisy_, config_.rpr);
    result_.buffer.push_back(BufferEntry{
        next_id_++, round, candidate.slot,
        RewardSource{candidate.compiled->source(), config_.arity},
        *candidate.compiled, std::move(report), candidate.response_text});
    return result_.buffer.back();
  }

  SlotOutcome slot_from_candidate(int round,
                                  const llm::SampledCandidate& candidate) {
    SlotOutcome slot;
    slot.slot = candidate.slot;
    slot.attempts = candidate.attempts;
    slot.response_text = candidate.response_text;
    if (!candidate.ok()) {
      slot.failure = candidate.failure;
      return slot;
    }
    const BufferEntry& entry = admit(round, candidate);
    slot.accepted = true;
    slot.entry_id = entry.id;
    slot.candidate_source = entry.source.text;
    slot.report = entry.report;
    return slot;
  }

  void sample_fresh(RoundOutcome& round) {
    std::vector<llm::ChatMessage> prompt{{"user", query_}};
    llm::SampleRun run =
        llm::sample_candidates(provider_, prompt, config_.n, config_.gen,
                               context_, config_.retry_budget);
    for (const auto& candidate : run.candidates)
      round.slots.push_back(slot_from_candidate(round.round, candidate));
    accumulate(run.usage);
  }

  void initial_generation() {
    RoundOutcome round;
    round.round = 0;
    sample_fresh(round);
    bool any_valid = false;
    for (const auto& entry : result_.buffer)
      if (entry.report.valid) any_valid = true;
    finish_round(std::move(round));
    if (!any_valid)
      raise(Errc::no_valid_candidates,
            "initial generation produced no scoreable reward");
  }

  // Best/worst valid buffer entries by score (ids ascending in buffer, so
  // ties resolve to lowest id for chosen, highest for rejected).
  PairSelection current_pair() const {
    std::vector<std::pair<int, double>> scores;
    for (const auto& entry : result_.buffer)
      if (entry.report.valid)
        scores.emplace_back(entry.id, entry.report.score);
    return select_pair(scores);
  }

  const BufferEntry& entry_by_id(int id) const {
    for (const auto& entry : result_.buffer)
      if (entry.id == id) return entry;
    raise(Errc::internal, "buffer entry lookup failed");
  }

  llm::Completion ask(const std::string& prompt_text) {
    llm::Completion c = provider_.complete({{"user", prompt_text}}, config_.gen);
    result_.usage.add(c);
    return c;
  }

  void refine_round(int round_index) {
    RoundOutcome round;
    round.round = round_index;
    PairSelection pair = current_pair();
    if (!pair.has_pair) {
      // Not enough material to form a preference; fall back to fresh
      // generation so the round still makes progress.
      round.degraded = true;
      sample_fresh(round);
      finish_round(std::move(round));
      return;
    }
    round.chosen_id = pair.chosen_id;
    round.rejected_id = pair.rejected_id;
    const std::string chosen_source = entry_by_id(pair.chosen_id).source.text;
    const std::string rejected_source =
        entry_by_id(pair.rejected_id).source.text;

    for (int slot_index = 0; slot_index < config_.n; ++slot_index) {
      SlotOutcome slot;
      slot.slot = slot_index;
      slot.loss_prompt =
          render_loss(templates_, query_, chosen_source, rejected_source);
      slot.loss_response = ask(slot.loss_prompt).text;
      slot.grad_prompt = render_grad(templates_, slot.loss_response);
      slot.grad_response = ask(slot.grad_prompt).text;
      slot.update_prompt =
          render_update(templates_, slot.grad_response, chosen_source);

      llm::SampledCandidate candidate;
      candidate.slot = slot_index;
      for (int attempt = 0; attempt <= config_.retry_budget; ++attempt) {
        llm::Completion completion = ask(slot.update_prompt);
        candidate.attempts = attempt + 1;
        candidate.response_text = completion.text;
        try {
          candidate.compiled = llm::compile_response(completion.text, context_);
          candidate.failure.clear();
          break;
        } catch (const Error& e) {
          if (e.code() != Errc::extraction && e.code() != Errc::parse &&
              e.code() != Errc::bounds && e.code() != Errc::arity)
            throw;
          candidate.failure =
              std::string(errc_name(e.code())) + ": " + e.what();
        }
      }

      SlotOutcome scored = slot_from_candidate(round_index, candidate);
      slot.accepted = scored.accepted;
      slot.entry_id = scored.entry_id;
      slot.failure = scored.failure;
      slot.attempts = scored.attempts;
      slot.response_text = scored.response_text;
      slot.candidate_source = scored.candidate_source;
      slot.report = scored.report;
      round.slots.push_back(std::move(slot));
    }
    finish_round(std::move(round));
  }

  void accumulate(const llm::UsageTotals& usage) {
    result_.usage.requests += usage.requests;
    result_.usage.prompt_tokens += usage.prompt_tokens;
    result_.usage.completion_tokens += usage.completion_tokens;
  }

  void finish_round(RoundOutcome round) {
    result_.rounds.push_back(std::move(round));
    if (sink_) sink_(result_.rounds.back());
  }

  llm::Provider& provider_;
  const PromptTemplates& templates_;
  const Dataset& offline_;
  const Dataset& expert_;
  const NoisySet& noisy_;
  OptimizeConfig config_;
  RoundSink sink_;
  std::string query_;
  llm::SamplingContext context_;
  OptimizeResult result_;
  int next_id_ = 0;
};

}  // namespace

OptimizeResult optimize(llm::Provider& provider, const PromptBundle& bundle,
                        const PromptTemplates& templates,
                        const Dataset& offline, const Dataset& expert,
                        const NoisySet& noisy, const OptimizeConfig& config,
                        const RoundSink& sink) {
  return Loop(provider, bundle, templates, offline, expert, noisy, config,
              sink)
      .run();
}

}  // namespace prof
