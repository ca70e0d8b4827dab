#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace bfrl {

struct StepResult {
  std::vector<double> next_state;
  double vanilla_reward = 0.0;
  // Equals vanilla_reward unless a barrier shaping wrapper is attached.
  double shaped_reward = 0.0;
  bool done = false;
  // Per actuated joint, for energy accounting: applied generalized force and
  // the matching displacement over the step.
  std::vector<double> joint_torque;
  std::vector<double> joint_delta;
};

struct EnvDescriptor {
  int state_dim = 0;
  int action_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  double dt = 0.0;
  std::vector<std::string> state_labels;
  int max_episode_steps = 0;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvDescriptor& descriptor() const = 0;
  // Deterministic initial state for a given seed.
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  // Actions outside the bounds are clipped. Stepping a finished episode
  // throws std::logic_error.
  virtual StepResult step(const std::vector<double>& action) = 0;
  virtual bool done() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>()>;

}  // namespace bfrl
