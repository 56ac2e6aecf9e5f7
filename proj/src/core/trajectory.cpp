#include "core/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/trajectory_io.hpp"

namespace prof {
namespace {

void check_finite(const std::vector<float>& v, const char* what) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      raise(Errc::non_finite,
            std::string("non-finite ") + what + " element at flat index " +
                std::to_string(i));
    }
  }
}

}  // namespace

Trajectory Trajectory::matrix_form(int32_t obs_dim, int32_t act_dim,
                                   std::vector<float> states,
                                   std::vector<float> actions,
                                   std::vector<float> rewards) {
  Trajectory t;
  t.layout_ = StateLayout::kMatrix;
  t.obs_dim_ = obs_dim;
  t.act_dim_ = act_dim;
  t.states_ = std::move(states);
  t.actions_ = std::move(actions);
  t.rewards_ = std::move(rewards);
  if (obs_dim <= 0) raise(Errc::dimension, "obs_dim must be positive");
  if (act_dim < 0) raise(Errc::dimension, "act_dim must be non-negative");
  if (t.states_.size() % size_t(obs_dim) != 0)
    raise(Errc::dimension, "state buffer is not a multiple of obs_dim");
  int64_t rows = int64_t(t.states_.size() / size_t(obs_dim));
  if (rows < 2) raise(Errc::dimension, "matrix trajectory needs >= 2 state rows");
  t.length_ = rows - 1;
  t.validate();
  return t;
}

Trajectory Trajectory::per_transition_form(int32_t obs_dim, int32_t act_dim,
                                           std::vector<float> states,
                                           std::vector<float> actions,
                                           std::vector<float> rewards) {
  Trajectory t;
  t.layout_ = StateLayout::kPerTransition;
  t.obs_dim_ = obs_dim;
  t.act_dim_ = act_dim;
  t.states_ = std::move(states);
  t.actions_ = std::move(actions);
  t.rewards_ = std::move(rewards);
  if (obs_dim <= 0) raise(Errc::dimension, "obs_dim must be positive");
  if (act_dim < 0) raise(Errc::dimension, "act_dim must be non-negative");
  if (t.states_.size() % (2 * size_t(obs_dim)) != 0)
    raise(Errc::dimension, "state buffer is not a multiple of 2*obs_dim");
  t.length_ = int64_t(t.states_.size() / (2 * size_t(obs_dim)));
  if (t.length_ < 1) raise(Errc::dimension, "empty trajectory");
  t.validate();
  return t;
}

void Trajectory::validate() const {
  if (act_dim_ > 0 && actions_.size() != size_t(length_) * size_t(act_dim_))
    raise(Errc::dimension, "action buffer does not match L*act_dim");
  if (act_dim_ == 0 && !actions_.empty())
    raise(Errc::dimension, "act_dim is 0 but actions present");
  if (!rewards_.empty() && rewards_.size() != size_t(length_))
    raise(Errc::dimension, "reward buffer does not match trajectory length");
  check_finite(states_, "observation");
  check_finite(actions_, "action");
  check_finite(rewards_, "reward");
}

std::span<const float> Trajectory::obs(int64_t t) const {
  size_t row = layout_ == StateLayout::kMatrix ? size_t(t) : size_t(2 * t);
  return {states_.data() + row * size_t(obs_dim_), size_t(obs_dim_)};
}

std::span<const float> Trajectory::next_obs(int64_t t) const {
  size_t row = layout_ == StateLayout::kMatrix ? size_t(t + 1) : size_t(2 * t + 1);
  return {states_.data() + row * size_t(obs_dim_), size_t(obs_dim_)};
}

std::span<const float> Trajectory::action(int64_t t) const {
  return {actions_.data() + size_t(t) * size_t(act_dim_), size_t(act_dim_)};
}

float Trajectory::reward(int64_t t) const {
  if (rewards_.empty()) raise(Errc::missing_rewards, "trajectory has no rewards");
  return rewards_[size_t(t)];
}

Dataset::Dataset(std::vector<Trajectory> trajectories)
    : trajectories_(std::move(trajectories)) {
  if (trajectories_.empty()) raise(Errc::validation, "dataset is empty");
  obs_dim_ = trajectories_.front().obs_dim();
  act_dim_ = trajectories_.front().act_dim();
  has_rewards_ = trajectories_.front().has_rewards();
  for (const auto& t : trajectories_) {
    if (t.obs_dim() != obs_dim_ || t.act_dim() != act_dim_)
      raise(Errc::dimension, "mixed trajectory dimensions in dataset");
    if (t.has_rewards() != has_rewards_)
      raise(Errc::validation, "mixed labeled/unlabeled trajectories in dataset");
  }
}

const Trajectory& Dataset::at(int64_t i) const {
  if (i < 0 || i >= size()) raise(Errc::invalid_argument, "trajectory index out of range");
  return trajectories_[size_t(i)];
}

double compute_return(const Trajectory& traj) {
  if (!traj.has_rewards())
    raise(Errc::missing_rewards, "cannot compute return of unlabeled trajectory");
  double sum = 0.0;
  for (float r : traj.rewards_raw()) sum += double(r);
  return sum;
}

int64_t min_return_index(const Dataset& dataset) {
  int64_t best = 0;
  double best_return = compute_return(dataset.at(0));
  for (int64_t i = 1; i < dataset.size(); ++i) {
    double r = compute_return(dataset.at(i));
    if (r < best_return) {
      best_return = r;
      best = i;
    }
  }
  return best;
}

SplitResult select_expert(const Dataset& dataset, const SplitSpec& spec) {
  if (spec.source == ExpertSource::kExternalFile) {
    if (spec.expert_path.empty())
      raise(Errc::validation, "external expert source requires a path");
    Dataset expert = load_dataset(spec.expert_path, DatasetFormat::kAuto);
    if (expert.obs_dim() != dataset.obs_dim() ||
        expert.act_dim() != dataset.act_dim())
      raise(Errc::dimension, "external expert dimensions do not match dataset");
    return SplitResult{std::move(expert), dataset, {}};
  }

  if (spec.expert_count < 1)
    raise(Errc::validation, "expert_count must be >= 1");
  if (spec.expert_count > dataset.size())
    raise(Errc::k_too_large, "expert_count " + std::to_string(spec.expert_count) +
                                 " exceeds dataset size " +
                                 std::to_string(dataset.size()));
  if (!dataset.has_rewards())
    raise(Errc::missing_rewards,
          "by-highest-return expert selection needs stored rewards");

  std::vector<int64_t> order(size_t(dataset.size()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> returns(order.size());
  for (size_t i = 0; i < order.size(); ++i)
    returns[i] = compute_return(dataset.at(int64_t(i)));
  std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    return returns[size_t(a)] > returns[size_t(b)];
  });
  order.resize(size_t(spec.expert_count));

  std::vector<Trajectory> expert;
  expert.reserve(order.size());
  for (int64_t idx : order) expert.push_back(dataset.at(idx));
  return SplitResult{Dataset(std::move(expert)), dataset, std::move(order)};
}

}  // namespace prof
