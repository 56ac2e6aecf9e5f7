#include "core/noise.hpp"

#include <cmath>

#include "core/rng.hpp"
#include "core/sha256.hpp"

namespace prof {
namespace {

// Population std (1/L) per dimension over the first L rows of a
// row-major buffer.
std::vector<double> column_std(const float* data, int64_t rows, int32_t dim,
                               size_t row_stride) {
  std::vector<double> mean(size_t(dim), 0.0);
  for (int64_t r = 0; r < rows; ++r)
    for (int32_t d = 0; d < dim; ++d)
      mean[size_t(d)] += double(data[size_t(r) * row_stride + size_t(d)]);
  for (auto& m : mean) m /= double(rows);
  std::vector<double> var(size_t(dim), 0.0);
  for (int64_t r = 0; r < rows; ++r)
    for (int32_t d = 0; d < dim; ++d) {
      double delta = double(data[size_t(r) * row_stride + size_t(d)]) - mean[size_t(d)];
      var[size_t(d)] += delta * delta;
    }
  for (auto& v : var) v = std::sqrt(v / double(rows));
  return var;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> noise_scales(
    const Trajectory& traj, double alpha_o, double alpha_a) {
  if (alpha_o < 0.0 || alpha_a < 0.0)
    raise(Errc::validation, "noise scale factors must be non-negative");
  int64_t rows = traj.length();
  size_t obs_stride = traj.layout() == StateLayout::kMatrix
                          ? size_t(traj.obs_dim())
                          : size_t(2 * traj.obs_dim());
  auto sigma_o = column_std(traj.states_raw().data(), rows, traj.obs_dim(),
                            obs_stride);
  for (auto& s : sigma_o) s *= alpha_o;
  std::vector<double> sigma_a;
  if (traj.act_dim() > 0) {
    sigma_a = column_std(traj.actions_raw().data(), rows, traj.act_dim(),
                         size_t(traj.act_dim()));
    for (auto& s : sigma_a) s *= alpha_a;
  }
  return {std::move(sigma_o), std::move(sigma_a)};
}

NoisySet::NoisySet(std::vector<Trajectory> trajectories,
                   std::vector<double> sigma_o, std::vector<double> sigma_a,
                   NoiseConfig config)
    : trajectories_(std::move(trajectories)),
      sigma_o_(std::move(sigma_o)),
      sigma_a_(std::move(sigma_a)),
      config_(config) {
  if (trajectories_.empty()) raise(Errc::validation, "noisy set is empty");
}

const std::string& NoisySet::digest() const {
  if (!digest_.empty()) return digest_;
  Sha256 h;
  h.update("prof-noisy-v1\n");
  const Trajectory& first = trajectories_.front();
  int32_t dims[2] = {first.obs_dim(), first.act_dim()};
  h.update(dims, sizeof(dims));
  int64_t count = size();
  h.update(&count, sizeof(count));
  h.update(&config_.seed, sizeof(config_.seed));
  double alphas[2] = {config_.alpha_o, config_.alpha_a};
  h.update(alphas, sizeof(alphas));
  for (const auto& t : trajectories_) {
    int64_t len = t.length();
    h.update(&len, sizeof(len));
    h.update(t.states_raw().data(), t.states_raw().size() * sizeof(float));
    h.update(t.actions_raw().data(), t.actions_raw().size() * sizeof(float));
    h.update(t.rewards_raw().data(), t.rewards_raw().size() * sizeof(float));
  }
  digest_ = h.finish_hex();
  return digest_;
}

NoisySet synthesize_noisy(const Trajectory& expert_min,
                          const NoiseConfig& config) {
  if (config.h_count < 1)
    raise(Errc::validation, "noisy trajectory count must be >= 1");
  auto [sigma_o, sigma_a] =
      noise_scales(expert_min, config.alpha_o, config.alpha_a);

  const int64_t len = expert_min.length();
  const int32_t d_o = expert_min.obs_dim();
  const int32_t d_a = expert_min.act_dim();

  std::vector<Trajectory> out;
  out.reserve(size_t(config.h_count));
  std::vector<float> states(size_t(2 * len) * size_t(d_o));
  std::vector<float> actions(size_t(len) * size_t(d_a));
  for (int64_t h = 0; h < config.h_count; ++h) {
    GaussianStream gauss(config.seed, uint64_t(h));
    for (int64_t t = 0; t < len; ++t) {
      auto o = expert_min.obs(t);
      auto n = expert_min.next_obs(t);
      auto a = expert_min.action(t);
      float* o_out = states.data() + size_t(2 * t) * size_t(d_o);
      float* n_out = states.data() + size_t(2 * t + 1) * size_t(d_o);
      float* a_out = actions.data() + size_t(t) * size_t(d_a);
      if (t == len - 1) {
        // The terminal transition stays exact so every noisy trajectory
        // still ends where the expert ended.
        std::copy(o.begin(), o.end(), o_out);
        std::copy(n.begin(), n.end(), n_out);
        std::copy(a.begin(), a.end(), a_out);
        continue;
      }
      for (int32_t d = 0; d < d_o; ++d)
        o_out[d] = float(double(o[size_t(d)]) + sigma_o[size_t(d)] * gauss.next());
      for (int32_t d = 0; d < d_a; ++d)
        a_out[d] = float(double(a[size_t(d)]) + sigma_a[size_t(d)] * gauss.next());
      for (int32_t d = 0; d < d_o; ++d)
        n_out[d] = float(double(n[size_t(d)]) + sigma_o[size_t(d)] * gauss.next());
    }
    out.push_back(Trajectory::per_transition_form(
        d_o, d_a, states, actions, expert_min.rewards_raw()));
  }
  return NoisySet(std::move(out), std::move(sigma_o), std::move(sigma_a),
                  config);
}

}  // namespace prof
