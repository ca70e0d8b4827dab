#include "bfrl/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bfrl {

CartPoleEnv::CartPoleEnv(const CartPoleParams& params) : params_(params) {
  if (!(params_.dt > 0.0)) {
    throw std::invalid_argument("cartpole: dt must be positive");
  }
  if (!(params_.force_max > 0.0) || !(params_.track_limit > 0.0) ||
      !(params_.termination_angle > 0.0)) {
    throw std::invalid_argument("cartpole: bounds must be positive");
  }
  if (params_.max_episode_steps < 1) {
    throw std::invalid_argument("cartpole: max_episode_steps must be >= 1");
  }
  descriptor_.state_dim = 4;
  descriptor_.action_dim = 1;
  descriptor_.action_low = {-params_.force_max};
  descriptor_.action_high = {params_.force_max};
  descriptor_.dt = params_.dt;
  descriptor_.state_labels = {"theta_p", "omega_p", "x_c", "v_c"};
  descriptor_.max_episode_steps = params_.max_episode_steps;
}

std::vector<double> CartPoleEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  theta_ = noise(rng_);
  omega_ = noise(rng_);
  x_ = noise(rng_);
  v_ = noise(rng_);
  if (params_.init_angle) {
    theta_ = *params_.init_angle;
  }
  steps_ = 0;
  done_ = false;
  return {theta_, omega_, x_, v_};
}

void CartPoleEnv::set_state(double theta, double omega, double x, double v) {
  theta_ = theta;
  omega_ = omega;
  x_ = x;
  v_ = v;
  steps_ = 0;
  done_ = false;
}

StepResult CartPoleEnv::step(const std::vector<double>& action) {
  if (done_) {
    throw std::logic_error("cartpole: step() on a finished episode");
  }
  if (action.size() != 1) {
    throw std::invalid_argument("cartpole: action must have one entry");
  }
  const double force =
      std::clamp(action[0], -params_.force_max, params_.force_max);

  const double mc = params_.cart_mass;
  const double mp = params_.pole_mass;
  const double l = params_.pole_half_length;
  const double g = params_.gravity;
  const double total_mass = mc + mp;

  const double sin_t = std::sin(theta_);
  const double cos_t = std::cos(theta_);
  // Pole modeled as a uniform rod about the pivot (the 4/3 factor).
  const double temp = (force + mp * l * omega_ * omega_ * sin_t) / total_mass;
  const double theta_acc =
      (g * sin_t - cos_t * temp) /
      (l * (4.0 / 3.0 - mp * cos_t * cos_t / total_mass));
  const double x_acc = temp - mp * l * theta_acc * cos_t / total_mass;

  const double x_prev = x_;
  // Semi-implicit Euler: velocities first, positions with the new velocities.
  omega_ += theta_acc * params_.dt;
  theta_ += omega_ * params_.dt;
  v_ += x_acc * params_.dt;
  x_ += v_ * params_.dt;
  ++steps_;

  const bool failed = std::abs(theta_) > params_.termination_angle ||
                      std::abs(x_) > params_.track_limit;
  done_ = failed || steps_ >= params_.max_episode_steps;

  StepResult result;
  result.next_state = {theta_, omega_, x_, v_};
  result.vanilla_reward = failed ? 0.0 : 1.0;
  result.shaped_reward = result.vanilla_reward;
  result.done = done_;
  // One actuated joint: the cart slider. Its "torque" is the applied force
  // and its displacement is the cart travel. The pole joint is passive and
  // contributes no actuation energy.
  result.joint_torque = {force};
  result.joint_delta = {x_ - x_prev};
  return result;
}

}  // namespace bfrl
