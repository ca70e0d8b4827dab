#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

#include "bfrl/barrier.hpp"
#include "bfrl/cartpole.hpp"
#include "bfrl/pendulum.hpp"
#include "bfrl/shaped_env.hpp"

using namespace bfrl;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::vector<double>> rollout(Env& env, std::uint64_t seed,
                                         const std::vector<double>& forces) {
  std::vector<std::vector<double>> states{env.reset(seed)};
  for (double f : forces) {
    if (env.done()) break;
    states.push_back(env.step({f}).next_state);
  }
  return states;
}

// Exact rod-on-cart mechanical energy; conserved with zero force.
double cartpole_energy(const CartPoleParams& p, const std::vector<double>& s) {
  const double theta = s[0], omega = s[1], v = s[3];
  const double l = p.pole_half_length;
  const double i_cm = p.pole_mass * l * l / 3.0;
  const double v_cm_sq = v * v + 2.0 * l * omega * v * std::cos(theta) +
                         l * l * omega * omega;
  return 0.5 * p.cart_mass * v * v + 0.5 * p.pole_mass * v_cm_sq +
         0.5 * i_cm * omega * omega +
         p.pole_mass * p.gravity * l * std::cos(theta);
}

}  // namespace

TEST_CASE("cartpole reset is deterministic per seed") {
  CartPoleEnv a, b;
  CHECK(a.reset(42) == b.reset(42));
  CHECK(a.reset(42) != a.reset(43));
  const std::vector<double> s = b.reset(7);
  for (double x : s) {
    CHECK(std::abs(x) <= 0.05);
  }
}

TEST_CASE("cartpole configured initial angle is exact, rest stays noisy") {
  CartPoleParams params;
  params.init_angle = -0.6981317007977318;  // -40 deg
  params.termination_angle = 1.2;
  CartPoleEnv env(params);
  const std::vector<double> s = env.reset(3);
  CHECK(s[0] == -0.6981317007977318);
  CHECK(std::abs(s[1]) <= 0.05);
  CHECK(std::abs(s[2]) <= 0.05);
  CHECK(std::abs(s[3]) <= 0.05);
}

TEST_CASE("cartpole equilibrium is a fixed point") {
  CartPoleEnv env;
  env.reset(0);
  env.set_state(0.0, 0.0, 0.0, 0.0);
  const StepResult res = env.step({0.0});
  CHECK(res.next_state == std::vector<double>{0.0, 0.0, 0.0, 0.0});
  CHECK(res.vanilla_reward == 1.0);
  CHECK(res.shaped_reward == 1.0);
  CHECK_FALSE(res.done);
}

TEST_CASE("cartpole first step from rest matches a hand-integrated euler step") {
  CartPoleEnv env;
  env.reset(0);
  env.set_state(0.0, 0.0, 0.0, 0.0);
  const StepResult res = env.step({10.0});

  // Same constants, written out independently.
  const double mc = 1.0, mp = 0.1, l = 0.5, dt = 0.02;
  const double temp = 10.0 / (mc + mp);
  const double theta_acc = (0.0 - 1.0 * temp) / (l * (4.0 / 3.0 - mp / (mc + mp)));
  const double x_acc = temp - mp * l * theta_acc * 1.0 / (mc + mp);
  const double omega1 = theta_acc * dt;
  const double theta1 = omega1 * dt;
  const double v1 = x_acc * dt;
  const double x1 = v1 * dt;

  CHECK(res.next_state[0] == doctest::Approx(theta1).epsilon(1e-15));
  CHECK(res.next_state[1] == doctest::Approx(omega1).epsilon(1e-15));
  CHECK(res.next_state[2] == doctest::Approx(x1).epsilon(1e-15));
  CHECK(res.next_state[3] == doctest::Approx(v1).epsilon(1e-15));
  // Push right: cart accelerates right, pole tips the other way.
  CHECK(res.next_state[3] > 0.0);
  CHECK(res.next_state[0] < 0.0);
  // Energy info: applied force and cart travel.
  CHECK(res.joint_torque == std::vector<double>{10.0});
  CHECK(res.joint_delta == std::vector<double>{x1});
}

TEST_CASE("cartpole zero-force energy drift stays under 1% for 200 steps") {
  CartPoleParams params;
  params.termination_angle = 1e9;  // free swing
  params.track_limit = 1e9;
  CartPoleEnv env(params);
  env.reset(0);
  // Oscillation about the stable (hanging) equilibrium; the upright start
  // falls into a full-energy swing, which is not a conservation regime.
  const double theta0 = kPi - 0.5;
  env.set_state(theta0, 0.0, 0.0, 0.0);
  const double e0 = cartpole_energy(params, {theta0, 0.0, 0.0, 0.0});
  double max_drift = 0.0;
  for (int i = 0; i < 200; ++i) {
    const StepResult res = env.step({0.0});
    const double e = cartpole_energy(params, res.next_state);
    max_drift = std::max(max_drift, std::abs(e - e0) / std::abs(e0));
  }
  CHECK(max_drift < 0.01);
}

TEST_CASE("cartpole termination matches its conditions exactly") {
  CartPoleParams params;
  params.max_episode_steps = 1000;
  CartPoleEnv env(params);
  env.reset(0);
  env.set_state(0.0, 0.0, 0.0, 0.0);
  bool done = false;
  std::vector<double> last;
  while (!done) {
    const StepResult res = env.step({10.0});
    done = res.done;
    last = res.next_state;
    if (!done) {
      CHECK(std::abs(res.next_state[0]) <= params.termination_angle);
      CHECK(std::abs(res.next_state[2]) <= params.track_limit);
      CHECK(res.vanilla_reward == 1.0);
    } else {
      CHECK(res.vanilla_reward == 0.0);  // failure step
    }
  }
  const bool violated = std::abs(last[0]) > params.termination_angle ||
                        std::abs(last[2]) > params.track_limit;
  CHECK(violated);
}

TEST_CASE("stepping a finished episode throws") {
  CartPoleParams params;
  params.max_episode_steps = 3;
  CartPoleEnv env(params);
  env.reset(1);
  env.step({0.0});
  env.step({0.0});
  const StepResult res = env.step({0.0});
  CHECK(res.done);  // time limit
  CHECK_THROWS_AS(env.step({0.0}), std::logic_error);

  PendulumParams pp;
  pp.max_episode_steps = 1;
  PendulumEnv pend(pp);
  pend.reset(1);
  CHECK(pend.step({0.0}).done);
  CHECK_THROWS_AS(pend.step({0.0}), std::logic_error);
}

TEST_CASE("trajectories are bitwise deterministic per (seed, actions)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> force(-10.0, 10.0);
  std::vector<double> forces(50);
  for (double& f : forces) f = force(rng);
  CartPoleParams params;
  params.termination_angle = kPi / 2.0;
  CartPoleEnv a(params), b(params);
  CHECK(rollout(a, 9, forces) == rollout(b, 9, forces));
}

TEST_CASE("pendulum basics") {
  PendulumEnv env;
  env.reset(0);
  env.set_state(0.0, 0.0);
  const StepResult res = env.step({0.0});
  CHECK(res.vanilla_reward == 0.0);
  CHECK(res.joint_torque == std::vector<double>{0.0});

  // Wrapping and speed clamp hold along a forced trajectory.
  env.reset(12);
  while (!env.done()) {
    const StepResult r = env.step({2.0});
    CHECK(r.next_state[0] > -kPi);
    CHECK(r.next_state[0] <= kPi);
    CHECK(std::abs(r.next_state[1]) <= 8.0);
  }

  CHECK(PendulumEnv::wrap_angle(kPi) == kPi);
  CHECK(PendulumEnv::wrap_angle(-kPi) == kPi);
  CHECK(PendulumEnv::wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(PendulumEnv::wrap_angle(0.1 + 4.0 * kPi) == doctest::Approx(0.1));
}

TEST_CASE("pendulum reward is the pre-step quadratic cost") {
  PendulumEnv env;
  env.reset(0);
  env.set_state(0.5, -1.0);
  const double u = 1.5;
  const StepResult res = env.step({u});
  const double expected = -(0.5 * 0.5 + 0.1 * 1.0 + 0.001 * u * u);
  CHECK(res.vanilla_reward == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("shaping never mutates the vanilla reward or the dynamics") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> force(-10.0, 10.0);
  std::vector<double> forces(100);
  for (double& f : forces) f = force(rng);

  CartPoleParams params;
  params.termination_angle = kPi / 2.0;
  BarrierSpec spec;
  spec.bounds = {BoundSpec{0, -0.2094, 0.2094}};

  CartPoleEnv plain(params);
  auto shaped = attach_shaping(std::make_unique<CartPoleEnv>(params), spec);

  std::vector<double> s_plain = plain.reset(21);
  std::vector<double> s_shaped = shaped->reset(21);
  CHECK(s_plain == s_shaped);
  for (double f : forces) {
    if (plain.done()) break;
    const StepResult a = plain.step({f});
    const StepResult b = shaped->step({f});
    CHECK(a.next_state == b.next_state);
    CHECK(a.vanilla_reward == b.vanilla_reward);
  }
}

TEST_CASE("first shaped step has zero hdot contribution") {
  BarrierSpec spec;
  spec.bounds = {BoundSpec{0, -1.0, 1.0}};
  spec.barrier_gain = 0.8;
  auto shaped = attach_shaping(std::make_unique<CartPoleEnv>(), spec);
  const std::vector<double> s0 = shaped->reset(4);
  const StepResult res = shaped->step({0.0});
  const double expected =
      shape_reward(res.vanilla_reward, spec.barrier_gain * eval_h(spec, s0));
  CHECK(res.shaped_reward == expected);
}

TEST_CASE("shaped cartpole matches the closed form evaluated with the fd rate") {
  const double phi = 0.2094, delta_a = 0.8;
  CartPoleParams params;
  params.termination_angle = kPi / 2.0;
  BarrierSpec spec;
  spec.kind = BarrierKind::Quadratic;
  spec.bounds = {BoundSpec{0, -phi, phi}};
  spec.params.delta_a = delta_a;
  spec.barrier_gain = 1.0;

  auto shaped = attach_shaping(std::make_unique<CartPoleEnv>(params), spec);
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> force(-5.0, 5.0);

  std::vector<double> prev = shaped->reset(2);
  std::vector<double> curr = prev;
  for (int k = 0; k < 100 && !shaped->done(); ++k) {
    const StepResult res = shaped->step({force(rng)});
    const double omega_fd = (curr[0] - prev[0]) / params.dt;
    const double closed =
        cartpole_quad_reward_closed_form(curr[0], omega_fd, phi, delta_a);
    // closed form includes vanilla = +1; on a failure step vanilla is 0.
    const double expected = closed - 1.0 + res.vanilla_reward;
    CHECK(res.shaped_reward == doctest::Approx(expected).epsilon(1e-12));
    prev = curr;
    curr = res.next_state;
  }
}

TEST_CASE("multi-variable shaping adds per-variable contributions") {
  CartPoleParams params;
  params.termination_angle = kPi / 2.0;
  const std::vector<BoundSpec> bounds{BoundSpec{0, -0.2094, 0.2094},
                                      BoundSpec{1, -1.0, 1.0},
                                      BoundSpec{3, -2.0, 2.0}};
  BarrierSpec multi;
  multi.bounds = bounds;

  auto shaped_multi = attach_shaping(std::make_unique<CartPoleEnv>(params), multi);
  std::vector<std::unique_ptr<ShapedEnv>> singles;
  for (const BoundSpec& b : bounds) {
    BarrierSpec s = multi;
    s.bounds = {b};
    singles.push_back(attach_shaping(std::make_unique<CartPoleEnv>(params), s));
  }

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> force(-8.0, 8.0);
  shaped_multi->reset(15);
  for (auto& env : singles) env->reset(15);
  for (int k = 0; k < 80 && !shaped_multi->done(); ++k) {
    const double f = force(rng);
    const StepResult res = shaped_multi->step({f});
    double sum = 0.0;
    for (auto& env : singles) {
      const StepResult r = env->step({f});
      sum += r.shaped_reward - r.vanilla_reward;
    }
    CHECK(res.shaped_reward - res.vanilla_reward ==
          doctest::Approx(sum).epsilon(1e-12));
  }
}

TEST_CASE("attach_shaping validates bound indices against the state") {
  BarrierSpec spec;
  spec.bounds = {BoundSpec{7, -1.0, 1.0}};
  CHECK_THROWS_AS(attach_shaping(std::make_unique<CartPoleEnv>(), spec),
                  std::invalid_argument);
}
