#include "core/rpr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace prof {
namespace {

void assign_row(std::vector<double>& out, std::span<const float> row) {
  out.assign(row.begin(), row.end());
}

}  // namespace

std::variant<double, EvalErrorKind> return_under(const RewardFn& fn,
                                                 const Trajectory& traj) {
  double sum = 0.0;
  std::vector<double> obs, act, next;
  for (int64_t t = 0; t < traj.length(); ++t) {
    assign_row(obs, traj.obs(t));
    assign_row(act, traj.action(t));
    assign_row(next, traj.next_obs(t));
    EvalOutcome out = fn(obs, act, next);
    if (!out.ok()) return out.error_kind();
    sum += out.value();
  }
  return sum;
}

std::variant<double, EvalErrorKind> return_under(const CompiledReward& reward,
                                                 const Trajectory& traj) {
  double sum = 0.0;
  std::vector<double> obs, act, next;
  for (int64_t t = 0; t < traj.length(); ++t) {
    assign_row(obs, traj.obs(t));
    assign_row(act, traj.action(t));
    assign_row(next, traj.next_obs(t));
    EvalOutcome out = reward.evaluate(obs, act, next);
    if (!out.ok()) return out.error_kind();
    sum += out.value();
  }
  return sum;
}

double threshold(const std::vector<double>& expert_returns, double delta) {
  if (expert_returns.empty())
    raise(Errc::validation, "threshold needs at least one expert return");
  if (delta < 0.0 || delta > 1.0 || !std::isfinite(delta))
    raise(Errc::validation, "delta must lie in [0, 1]");
  double min_return = *std::min_element(expert_returns.begin(),
                                        expert_returns.end());
  return min_return >= 0.0 ? (1.0 + delta) * min_return
                           : (1.0 - delta) * min_return;
}

namespace {

template <typename Eval>
DominanceReport dominance_impl(Eval&& eval_return, const Dataset& offline,
                               const Dataset& expert, const NoisySet& noisy,
                               const RprConfig& config) {
  if (config.delta < 0.0 || config.delta > 1.0 || !std::isfinite(config.delta))
    raise(Errc::validation, "delta must lie in [0, 1]");
  auto started = std::chrono::steady_clock::now();
  DominanceReport report;
  report.offline_total = offline.size();
  report.noisy_total = noisy.size();
  auto finish = [&](DominanceReport r) {
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();
    return r;
  };

  std::vector<double> expert_returns;
  expert_returns.reserve(size_t(expert.size()));
  for (int64_t i = 0; i < expert.size(); ++i) {
    auto r = eval_return(expert.at(i));
    if (std::holds_alternative<EvalErrorKind>(r)) {
      report.failure = std::get<EvalErrorKind>(r);
      return finish(report);
    }
    expert_returns.push_back(std::get<double>(r));
  }
  report.lambda = threshold(expert_returns, config.delta);

  for (int64_t i = 0; i < offline.size(); ++i) {
    auto r = eval_return(offline.at(i));
    if (std::holds_alternative<EvalErrorKind>(r)) {
      report.failure = std::get<EvalErrorKind>(r);
      return finish(report);
    }
    if (std::get<double>(r) <= report.lambda) ++report.offline_below;
  }
  for (int64_t i = 0; i < noisy.size(); ++i) {
    auto r = eval_return(noisy.at(i));
    if (std::holds_alternative<EvalErrorKind>(r)) {
      report.failure = std::get<EvalErrorKind>(r);
      return finish(report);
    }
    if (std::get<double>(r) < report.lambda) ++report.noisy_below;
  }

  report.valid = true;
  report.frac_offline =
      double(report.offline_below) / double(report.offline_total);
  report.frac_noisy = double(report.noisy_below) / double(report.noisy_total);
  report.score = 0.5 * (report.frac_offline + report.frac_noisy);
  return finish(report);
}

}  // namespace

DominanceReport dominance_score(const RewardFn& fn, const Dataset& offline,
                                const Dataset& expert, const NoisySet& noisy,
                                const RprConfig& config) {
  return dominance_impl(
      [&](const Trajectory& t) { return return_under(fn, t); }, offline,
      expert, noisy, config);
}

DominanceReport dominance_score(const CompiledReward& reward,
                                const Dataset& offline, const Dataset& expert,
                                const NoisySet& noisy,
                                const RprConfig& config) {
  return dominance_impl(
      [&](const Trajectory& t) { return return_under(reward, t); }, offline,
      expert, noisy, config);
}

PairSelection select_pair(const std::vector<std::pair<int, double>>& scores) {
  PairSelection out;
  if (scores.empty()) return out;
  int best = 0, worst = 0;
  for (int i = 1; i < int(scores.size()); ++i) {
    if (scores[size_t(i)].second > scores[size_t(best)].second)
      best = i;  // ties keep the earliest (lowest id)
    if (scores[size_t(i)].second <= scores[size_t(worst)].second)
      worst = i;  // ties move to the latest (highest id)
  }
  out.chosen_id = scores[size_t(best)].first;
  out.rejected_id = scores[size_t(worst)].first;
  out.has_pair = out.chosen_id != out.rejected_id;
  return out;
}

RankResult rank(
    const std::vector<std::pair<int, const CompiledReward*>>& candidates,
    const Dataset& offline, const Dataset& expert, const NoisySet& noisy,
    const RprConfig& config) {
  if (candidates.empty())
    raise(Errc::validation, "rank needs at least one candidate");
  RankResult out;
  std::vector<std::pair<int, double>> valid_scores;
  for (const auto& [id, reward] : candidates) {
    RankedCandidate rc;
    rc.id = id;
    rc.report = dominance_score(*reward, offline, expert, noisy, config);
    if (rc.report.valid) valid_scores.emplace_back(id, rc.report.score);
    out.reports.push_back(std::move(rc));
  }
  if (valid_scores.empty())
    raise(Errc::all_invalid, "every candidate failed evaluation");

  std::stable_sort(valid_scores.begin(), valid_scores.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  for (const auto& [id, score] : valid_scores) out.ranked_ids.push_back(id);
  out.pair = select_pair(valid_scores);
  return out;
}

}  // namespace prof
