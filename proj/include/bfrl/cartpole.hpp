#pragma once

#include <optional>
#include <random>

#include "bfrl/env.hpp"

namespace bfrl {

// Continuous-force cart-pole. State vector: [theta_p, omega_p, x_c, v_c]
// with theta_p = 0 upright. The classic discrete variant is replaced by a
// continuous force in [-force_max, force_max] so that deterministic-policy
// training applies.
struct CartPoleParams {
  double cart_mass = 1.0;         // kg
  double pole_mass = 0.1;         // kg
  double pole_half_length = 0.5;  // m, pivot to center of mass
  double gravity = 9.8;           // m/s^2
  double dt = 0.02;               // s
  double force_max = 10.0;        // N
  double track_limit = 2.4;       // m, |x_c| bound
  // Failure angle; distinct from any barrier bound placed on theta_p.
  double termination_angle = 0.20943951023931953;  // rad (12 deg)
  int max_episode_steps = 500;
  // When set, theta_p starts at exactly this angle; the other components
  // keep their seeded noise. Used by the stabilization sweep.
  std::optional<double> init_angle;
  bool operator==(const CartPoleParams&) const = default;
};

class CartPoleEnv final : public Env {
 public:
  explicit CartPoleEnv(const CartPoleParams& params = {});

  const EnvDescriptor& descriptor() const override { return descriptor_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(const std::vector<double>& action) override;
  bool done() const override { return done_; }

  // Puts the episode in an exact state; step count restarts.
  void set_state(double theta, double omega, double x, double v);

  const CartPoleParams& params() const { return params_; }

 private:
  CartPoleParams params_;
  EnvDescriptor descriptor_;
  double theta_ = 0.0, omega_ = 0.0, x_ = 0.0, v_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
  std::mt19937_64 rng_;
};

}  // namespace bfrl
