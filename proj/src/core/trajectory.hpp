#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace prof {

// How the observation payload of a trajectory is stored.
//
//  kMatrix:        (L+1) x obs_dim rows; row t is o_t, the next observation
//                  of transition t is row t+1.  Natural for contiguous
//                  episodes.
//  kPerTransition: 2L x obs_dim rows; rows (2t, 2t+1) are (o_t, o'_t).
//                  Required when consecutive transitions do not share
//                  observations (noise-perturbed copies).
enum class StateLayout { kMatrix, kPerTransition };

// One trajectory of L transitions.  Element storage is float32; all
// arithmetic on top of it is double.  Construction validates shape and
// finiteness, so downstream code can assume both.
class Trajectory {
 public:
  static Trajectory matrix_form(int32_t obs_dim, int32_t act_dim,
                                std::vector<float> states,
                                std::vector<float> actions,
                                std::vector<float> rewards);
  static Trajectory per_transition_form(int32_t obs_dim, int32_t act_dim,
                                        std::vector<float> states,
                                        std::vector<float> actions,
                                        std::vector<float> rewards);

  int64_t length() const { return length_; }
  int32_t obs_dim() const { return obs_dim_; }
  int32_t act_dim() const { return act_dim_; }
  StateLayout layout() const { return layout_; }
  bool has_rewards() const { return !rewards_.empty(); }

  std::span<const float> obs(int64_t t) const;
  std::span<const float> next_obs(int64_t t) const;
  std::span<const float> action(int64_t t) const;
  float reward(int64_t t) const;

  const std::vector<float>& states_raw() const { return states_; }
  const std::vector<float>& actions_raw() const { return actions_; }
  const std::vector<float>& rewards_raw() const { return rewards_; }

 private:
  Trajectory() = default;
  void validate() const;

  StateLayout layout_ = StateLayout::kMatrix;
  int64_t length_ = 0;
  int32_t obs_dim_ = 0;
  int32_t act_dim_ = 0;
  std::vector<float> states_;
  std::vector<float> actions_;
  std::vector<float> rewards_;  // empty when unlabeled
};

// Immutable bundle of trajectories with consistent dimensions.
class Dataset {
 public:
  Dataset(std::vector<Trajectory> trajectories);

  int64_t size() const { return int64_t(trajectories_.size()); }
  int32_t obs_dim() const { return obs_dim_; }
  int32_t act_dim() const { return act_dim_; }
  bool has_rewards() const { return has_rewards_; }
  const Trajectory& at(int64_t i) const;
  const std::vector<Trajectory>& trajectories() const { return trajectories_; }

 private:
  std::vector<Trajectory> trajectories_;
  int32_t obs_dim_ = 0;
  int32_t act_dim_ = 0;
  bool has_rewards_ = false;
};

// Sum of stored rewards, accumulated in double.  Throws missing_rewards
// for unlabeled trajectories.
double compute_return(const Trajectory& traj);

// Index of the trajectory with the smallest stored return (ties: lowest
// index).
int64_t min_return_index(const Dataset& dataset);

enum class ExpertSource { kByHighestReturn, kExternalFile };

struct SplitSpec {
  int64_t expert_count = 1;
  ExpertSource source = ExpertSource::kByHighestReturn;
  std::string expert_path;  // only for kExternalFile
};

struct SplitResult {
  Dataset expert;
  Dataset offline;                    // the full input dataset
  std::vector<int64_t> expert_index;  // indices into the input, empty for
                                      // external experts
};

// Selects the expert subset.  by-highest-return keeps the expert_count
// trajectories with the largest stored returns (ties: lower index first);
// the offline side is always the complete input.
SplitResult select_expert(const Dataset& dataset, const SplitSpec& spec);

}  // namespace prof
