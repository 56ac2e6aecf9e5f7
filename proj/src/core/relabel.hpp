#pragma once

#include <filesystem>

#include "core/reward/reward.hpp"
#include "core/trajectory.hpp"

namespace prof {

struct ScaleBounds {
  double r_min = 0.0;
  double r_max = 1.0;
};

// Named presets: locomotion (0, 2), goal-reaching (-2, 0),
// actor-critic-regularized (-1, 1).
ScaleBounds scale_preset(const std::string& name);

// Raw per-transition rewards for every trajectory.  Any evaluation
// failure aborts (a reward that cannot label the dataset is unusable).
std::vector<std::vector<double>> relabel(const Dataset& dataset,
                                         const CompiledReward& reward);

// Min-max rescale onto [r_min, r_max] over the flattened rewards.  The
// observed extremes map exactly onto the bounds; a constant signal maps
// to the midpoint; outputs are clamped against float rounding drift.
std::vector<std::vector<double>> rescale(
    const std::vector<std::vector<double>>& rewards, const ScaleBounds& bounds);

// Copy of the dataset with rewards replaced (float32 storage).
Dataset with_rewards(const Dataset& dataset,
                     const std::vector<std::vector<double>>& rewards);

}  // namespace prof
