#pragma once

#include <optional>
#include <vector>

namespace bfrl {

// Per-episode time series logged during evaluation rollouts. `states[k]` is
// the state the k-th action was taken in; torques/deltas come from the step's
// energy info. All per-step arrays share the episode length.
struct RunRecord {
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> actions;
  std::vector<double> vanilla_rewards;
  std::vector<double> shaped_rewards;
  std::vector<std::vector<double>> torques;
  std::vector<std::vector<double>> joint_deltas;
  int length = 0;
  double vanilla_return = 0.0;
  double shaped_return = 0.0;
  // Environment-defined progress rate; unset for tasks without one.
  std::optional<double> mean_velocity;
};

}  // namespace bfrl
