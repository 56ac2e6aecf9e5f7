#include "core/relabel.hpp"

#include <algorithm>
#include <cmath>

namespace prof {

ScaleBounds scale_preset(const std::string& name) {
  if (name == "locomotion") return {0.0, 2.0};
  if (name == "goal-reaching") return {-2.0, 0.0};
  if (name == "actor-critic-regularized") return {-1.0, 1.0};
  raise(Errc::config, "unknown scale preset '" + name + "'");
}

std::vector<std::vector<double>> relabel(const Dataset& dataset,
                                         const CompiledReward& reward) {
  std::vector<std::vector<double>> out;
  out.reserve(size_t(dataset.size()));
  std::vector<double> obs, act, next;
  for (int64_t i = 0; i < dataset.size(); ++i) {
    const Trajectory& traj = dataset.at(i);
    std::vector<double> rewards(size_t(traj.length()));
    for (int64_t t = 0; t < traj.length(); ++t) {
      obs.assign(traj.obs(t).begin(), traj.obs(t).end());
      act.assign(traj.action(t).begin(), traj.action(t).end());
      next.assign(traj.next_obs(t).begin(), traj.next_obs(t).end());
      EvalOutcome result = reward.evaluate(obs, act, next);
      if (!result.ok())
        raise(Errc::eval, std::string("reward failed (") +
                              eval_error_name(result.error_kind()) +
                              ") at trajectory " + std::to_string(i) +
                              " transition " + std::to_string(t));
      rewards[size_t(t)] = result.value();
    }
    out.push_back(std::move(rewards));
  }
  return out;
}

std::vector<std::vector<double>> rescale(
    const std::vector<std::vector<double>>& rewards,
    const ScaleBounds& bounds) {
  if (!(bounds.r_min < bounds.r_max))
    raise(Errc::validation, "scale bounds must satisfy r_min < r_max");
  bool any = false;
  double lo = 0.0, hi = 0.0;
  for (const auto& traj : rewards)
    for (double r : traj) {
      if (!any) {
        lo = hi = r;
        any = true;
      } else {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
  if (!any) raise(Errc::validation, "no rewards to rescale");

  std::vector<std::vector<double>> out;
  out.reserve(rewards.size());
  if (lo == hi) {
    double mid = 0.5 * (bounds.r_min + bounds.r_max);
    for (const auto& traj : rewards)
      out.emplace_back(traj.size(), mid);
    return out;
  }
  double scale = (bounds.r_max - bounds.r_min) / (hi - lo);
  for (const auto& traj : rewards) {
    std::vector<double> mapped(traj.size());
    for (size_t t = 0; t < traj.size(); ++t) {
      double r = traj[t];
      // Exact endpoints, no rounding drift at the extremes.
      double v = r == lo   ? bounds.r_min
                 : r == hi ? bounds.r_max
                           : bounds.r_min + (r - lo) * scale;
      mapped[t] = std::clamp(v, bounds.r_min, bounds.r_max);
    }
    out.push_back(std::move(mapped));
  }
  return out;
}

Dataset with_rewards(const Dataset& dataset,
                     const std::vector<std::vector<double>>& rewards) {
  if (int64_t(rewards.size()) != dataset.size())
    raise(Errc::dimension, "reward count does not match dataset size");
  std::vector<Trajectory> out;
  out.reserve(size_t(dataset.size()));
  for (int64_t i = 0; i < dataset.size(); ++i) {
    const Trajectory& traj = dataset.at(i);
    const auto& r = rewards[size_t(i)];
    if (int64_t(r.size()) != traj.length())
      raise(Errc::dimension, "reward length does not match trajectory " +
                                 std::to_string(i));
    std::vector<float> reward_f32(r.begin(), r.end());
    out.push_back(traj.layout() == StateLayout::kMatrix
                      ? Trajectory::matrix_form(
                            traj.obs_dim(), traj.act_dim(), traj.states_raw(),
                            traj.actions_raw(), std::move(reward_f32))
                      : Trajectory::per_transition_form(
                            traj.obs_dim(), traj.act_dim(), traj.states_raw(),
                            traj.actions_raw(), std::move(reward_f32)));
  }
  return Dataset(std::move(out));
}

}  // namespace prof
