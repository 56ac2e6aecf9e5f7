#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/trajectory.hpp"

namespace prof {

struct NoiseConfig {
  double alpha_o = 0.05;
  double alpha_a = 0.05;
  int64_t h_count = 10000;
  uint64_t seed = 0;
};

// Per-dimension noise scales for one trajectory: alpha times the
// population standard deviation over the L current-observation (resp.
// action) rows.
std::pair<std::vector<double>, std::vector<double>> noise_scales(
    const Trajectory& traj, double alpha_o, double alpha_a);

// H perturbed copies of one expert trajectory.  Every transition except
// the last gets independent Gaussian noise on (o_t, a_t, o_{t+1}); the
// last transition and all rewards are carried over untouched.  Stored
// per-transition because neighbouring noisy transitions no longer share
// observations.
class NoisySet {
 public:
  NoisySet(std::vector<Trajectory> trajectories, std::vector<double> sigma_o,
           std::vector<double> sigma_a, NoiseConfig config);

  int64_t size() const { return int64_t(trajectories_.size()); }
  const Trajectory& at(int64_t i) const { return trajectories_[size_t(i)]; }
  const std::vector<Trajectory>& trajectories() const { return trajectories_; }
  const std::vector<double>& sigma_o() const { return sigma_o_; }
  const std::vector<double>& sigma_a() const { return sigma_a_; }
  const NoiseConfig& config() const { return config_; }

  // Content digest (sha256 hex) of parameters plus payload; computed on
  // first use, which keeps huge sets cheap to build.
  const std::string& digest() const;

 private:
  std::vector<Trajectory> trajectories_;
  std::vector<double> sigma_o_;
  std::vector<double> sigma_a_;
  NoiseConfig config_;
  mutable std::string digest_;
};

NoisySet synthesize_noisy(const Trajectory& expert_min,
                          const NoiseConfig& config);

}  // namespace prof
