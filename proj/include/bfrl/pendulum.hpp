#pragma once

#include <optional>
#include <random>

#include "bfrl/env.hpp"

namespace bfrl {

// Torque-controlled pendulum. State vector: [theta, omega] with theta = 0
// upright, wrapped to (-pi, pi]. Dense quadratic cost, no failure state.
struct PendulumParams {
  double gravity = 10.0;  // m/s^2
  double mass = 1.0;      // kg
  double length = 1.0;    // m
  double dt = 0.05;       // s
  double max_torque = 2.0;
  double max_speed = 8.0;
  int max_episode_steps = 200;
  // When set, theta starts at exactly this angle; omega keeps seeded noise.
  std::optional<double> init_theta;
  bool operator==(const PendulumParams&) const = default;
};

class PendulumEnv final : public Env {
 public:
  explicit PendulumEnv(const PendulumParams& params = {});

  const EnvDescriptor& descriptor() const override { return descriptor_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(const std::vector<double>& action) override;
  bool done() const override { return done_; }

  // Puts the episode in an exact state; step count restarts.
  void set_state(double theta, double omega);

  const PendulumParams& params() const { return params_; }

  static double wrap_angle(double theta);  // to (-pi, pi]

 private:
  PendulumParams params_;
  EnvDescriptor descriptor_;
  double theta_ = 0.0, omega_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
  std::mt19937_64 rng_;
};

}  // namespace bfrl
