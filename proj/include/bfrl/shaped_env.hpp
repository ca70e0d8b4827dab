#pragma once

#include <memory>

#include "bfrl/barrier.hpp"
#include "bfrl/env.hpp"

namespace bfrl {

// Wraps an environment so every step carries shaped_reward = vanilla + r_bf.
//
// The shaping term for a step is computed from the two most recent states at
// which actions were selected: r_bf = reward_bf(prev, curr, dt) where curr is
// the state the current action is taken in. On the first step after reset no
// prior sample exists, so prev = curr = initial state and the hdot
// contribution is zero.
class ShapedEnv final : public Env {
 public:
  ShapedEnv(std::unique_ptr<Env> inner, BarrierSpec spec);

  const EnvDescriptor& descriptor() const override { return inner_->descriptor(); }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(const std::vector<double>& action) override;
  bool done() const override { return inner_->done(); }

  const BarrierSpec& spec() const { return spec_; }
  Env& inner() { return *inner_; }

 private:
  std::unique_ptr<Env> inner_;
  BarrierSpec spec_;
  std::vector<double> prev_obs_;
  std::vector<double> curr_obs_;
};

// Validates that the spec's indices fit the environment's state dimension.
std::unique_ptr<ShapedEnv> attach_shaping(std::unique_ptr<Env> env, BarrierSpec spec);

}  // namespace bfrl
