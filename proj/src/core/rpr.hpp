#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "core/noise.hpp"
#include "core/reward/reward.hpp"
#include "core/trajectory.hpp"

namespace prof {

struct RprConfig {
  double delta = 0.01;
};

// Per-candidate dominance report.  Fractions are exact integer counts
// divided once at the end; wall_ms is measurement, everything else is
// deterministic.
struct DominanceReport {
  bool valid = false;
  std::optional<EvalErrorKind> failure;
  double lambda = 0.0;
  double frac_offline = 0.0;
  double frac_noisy = 0.0;
  double score = 0.0;
  int64_t offline_below = 0;  // offline returns <= lambda
  int64_t noisy_below = 0;    // noisy returns < lambda
  int64_t offline_total = 0;
  int64_t noisy_total = 0;
  double wall_ms = 0.0;
};

// A transition-level reward evaluator; lets dominance scoring run over
// compiled programs and external processes alike.
using RewardFn = std::function<EvalOutcome(
    std::span<const double>, std::span<const double>, std::span<const double>)>;

// Trajectory return under an evaluator, or the first evaluation error.
std::variant<double, EvalErrorKind> return_under(const RewardFn& fn,
                                                 const Trajectory& traj);
std::variant<double, EvalErrorKind> return_under(const CompiledReward& reward,
                                                 const Trajectory& traj);

// Dominance threshold from expert returns: (1 + delta) * min when the
// min is >= 0, (1 - delta) * min otherwise, so the margin always sits
// below the weakest expert.
double threshold(const std::vector<double>& expert_returns, double delta);

DominanceReport dominance_score(const RewardFn& fn, const Dataset& offline,
                                const Dataset& expert, const NoisySet& noisy,
                                const RprConfig& config);
DominanceReport dominance_score(const CompiledReward& reward,
                                const Dataset& offline, const Dataset& expert,
                                const NoisySet& noisy,
                                const RprConfig& config);

// Best/worst pick over scored candidates.  Chosen: highest score, lowest
// id on ties.  Rejected: lowest score, highest id on ties.  With a single
// valid candidate there is no distinct pair.
struct PairSelection {
  int chosen_id = -1;
  int rejected_id = -1;
  bool has_pair = false;
};

PairSelection select_pair(const std::vector<std::pair<int, double>>& scores);

struct RankedCandidate {
  int id = 0;
  DominanceReport report;
};

struct RankResult {
  std::vector<RankedCandidate> reports;  // input order
  std::vector<int> ranked_ids;           // valid ids, best first
  PairSelection pair;
};

// Scores every candidate and ranks the valid ones.  Throws
// Error(all_invalid) when no candidate survives.
RankResult rank(const std::vector<std::pair<int, const CompiledReward*>>& candidates,
                const Dataset& offline, const Dataset& expert,
                const NoisySet& noisy, const RprConfig& config);

}  // namespace prof
