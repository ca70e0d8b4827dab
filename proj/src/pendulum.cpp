#include "bfrl/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bfrl {

double PendulumEnv::wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  const double two_pi = 2.0 * pi;
  double wrapped = std::fmod(theta + pi, two_pi);
  if (wrapped <= 0.0) {
    wrapped += two_pi;
  }
  return wrapped - pi;
}

PendulumEnv::PendulumEnv(const PendulumParams& params) : params_(params) {
  if (!(params_.dt > 0.0)) {
    throw std::invalid_argument("pendulum: dt must be positive");
  }
  if (!(params_.max_torque > 0.0) || !(params_.max_speed > 0.0)) {
    throw std::invalid_argument("pendulum: limits must be positive");
  }
  if (params_.max_episode_steps < 1) {
    throw std::invalid_argument("pendulum: max_episode_steps must be >= 1");
  }
  descriptor_.state_dim = 2;
  descriptor_.action_dim = 1;
  descriptor_.action_low = {-params_.max_torque};
  descriptor_.action_high = {params_.max_torque};
  descriptor_.dt = params_.dt;
  descriptor_.state_labels = {"theta", "omega"};
  descriptor_.max_episode_steps = params_.max_episode_steps;
}

std::vector<double> PendulumEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  constexpr double pi = std::numbers::pi;
  std::uniform_real_distribution<double> theta_dist(-pi, pi);
  std::uniform_real_distribution<double> omega_dist(-1.0, 1.0);
  theta_ = wrap_angle(theta_dist(rng_));
  omega_ = omega_dist(rng_);
  if (params_.init_theta) {
    theta_ = wrap_angle(*params_.init_theta);
  }
  steps_ = 0;
  done_ = false;
  return {theta_, omega_};
}

void PendulumEnv::set_state(double theta, double omega) {
  theta_ = wrap_angle(theta);
  omega_ = std::clamp(omega, -params_.max_speed, params_.max_speed);
  steps_ = 0;
  done_ = false;
}

StepResult PendulumEnv::step(const std::vector<double>& action) {
  if (done_) {
    throw std::logic_error("pendulum: step() on a finished episode");
  }
  if (action.size() != 1) {
    throw std::invalid_argument("pendulum: action must have one entry");
  }
  const double u = std::clamp(action[0], -params_.max_torque, params_.max_torque);

  const double g = params_.gravity;
  const double m = params_.mass;
  const double l = params_.length;

  // Cost of the state the action was taken in.
  const double cost =
      theta_ * theta_ + 0.1 * omega_ * omega_ + 0.001 * u * u;

  const double theta_acc =
      3.0 * g / (2.0 * l) * std::sin(theta_) + 3.0 / (m * l * l) * u;
  omega_ += theta_acc * params_.dt;
  omega_ = std::clamp(omega_, -params_.max_speed, params_.max_speed);
  const double delta_theta = omega_ * params_.dt;
  theta_ = wrap_angle(theta_ + delta_theta);
  ++steps_;
  done_ = steps_ >= params_.max_episode_steps;

  StepResult result;
  result.next_state = {theta_, omega_};
  result.vanilla_reward = -cost;
  result.shaped_reward = result.vanilla_reward;
  result.done = done_;
  result.joint_torque = {u};
  result.joint_delta = {delta_theta};
  return result;
}

}  // namespace bfrl
