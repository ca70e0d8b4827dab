#include "bfrl/shaped_env.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace bfrl {

ShapedEnv::ShapedEnv(std::unique_ptr<Env> inner, BarrierSpec spec)
    : inner_(std::move(inner)), spec_(std::move(spec)) {
  validate_spec(spec_);
  const auto state_dim = static_cast<std::size_t>(inner_->descriptor().state_dim);
  for (const BoundSpec& b : spec_.bounds) {
    if (b.index >= state_dim) {
      throw std::invalid_argument(
          "barrier bound index " + std::to_string(b.index) +
          " out of range for environment with state_dim " +
          std::to_string(state_dim));
    }
  }
}

std::vector<double> ShapedEnv::reset(std::uint64_t seed) {
  std::vector<double> state = inner_->reset(seed);
  prev_obs_ = state;
  curr_obs_ = state;
  return state;
}

StepResult ShapedEnv::step(const std::vector<double>& action) {
  const double r_bf =
      reward_bf(spec_, prev_obs_, curr_obs_, inner_->descriptor().dt);
  StepResult result = inner_->step(action);
  result.shaped_reward = shape_reward(result.vanilla_reward, r_bf);
  prev_obs_ = std::move(curr_obs_);
  curr_obs_ = result.next_state;
  return result;
}

std::unique_ptr<ShapedEnv> attach_shaping(std::unique_ptr<Env> env,
                                          BarrierSpec spec) {
  return std::make_unique<ShapedEnv>(std::move(env), std::move(spec));
}

}  // namespace bfrl
