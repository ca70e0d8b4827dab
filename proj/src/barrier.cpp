#include "bfrl/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bfrl {

namespace {

// Exponent arguments are clamped so that far out-of-bounds states saturate
// to a large finite penalty instead of overflowing.
constexpr double kMaxExpArg = 60.0;

double clamped_exp(double arg) { return std::exp(std::min(arg, kMaxExpArg)); }

void check_state(const BarrierSpec& spec, std::span<const double> state) {
  for (const BoundSpec& b : spec.bounds) {
    if (b.index >= state.size()) {
      throw std::invalid_argument("barrier bound index " + std::to_string(b.index) +
                                  " out of range for state of length " +
                                  std::to_string(state.size()));
    }
    if (!std::isfinite(state[b.index])) {
      throw std::domain_error("non-finite state element at index " +
                              std::to_string(b.index));
    }
  }
}

}  // namespace

double default_delta_b(double s_min, double s_max) {
  if (!(s_min < s_max)) {
    throw std::invalid_argument("default_delta_b: s_min must be < s_max");
  }
  return 10.0 / (s_max - s_min);
}

void validate_spec(const BarrierSpec& spec) {
  if (spec.bounds.empty()) {
    throw std::invalid_argument("barrier spec has no bounds");
  }
  for (std::size_t i = 0; i < spec.bounds.size(); ++i) {
    const BoundSpec& b = spec.bounds[i];
    if (!(b.s_min < b.s_max)) {
      throw std::invalid_argument("bound " + std::to_string(i) +
                                  ": s_min must be strictly less than s_max");
    }
    for (std::size_t j = i + 1; j < spec.bounds.size(); ++j) {
      if (spec.bounds[j].index == b.index) {
        throw std::invalid_argument("duplicate bound index " +
                                    std::to_string(b.index));
      }
    }
  }
  if (!(spec.params.delta_a > 0.0)) {
    throw std::invalid_argument("delta_a must be positive");
  }
  if (!(spec.params.delta_b > 0.0)) {
    throw std::invalid_argument("delta_b must be positive");
  }
  if (!(spec.barrier_gain > 0.0)) {
    throw std::invalid_argument("barrier_gain must be positive");
  }
}

double eval_h(const BarrierSpec& spec, std::span<const double> state) {
  validate_spec(spec);
  check_state(spec, state);
  const double da = spec.params.delta_a;
  const double db = spec.params.delta_b;
  double h = 0.0;
  for (const BoundSpec& b : spec.bounds) {
    const double s = state[b.index];
    if (spec.kind == BarrierKind::Quadratic) {
      h += da * (s - b.s_max) * (b.s_min - s);
    } else {
      h += da * (1.0 - (clamped_exp(db * (s - b.s_max)) +
                        clamped_exp(db * (b.s_min - s))));
    }
  }
  return h;
}

std::vector<double> grad_h(const BarrierSpec& spec, std::span<const double> state) {
  validate_spec(spec);
  check_state(spec, state);
  const double da = spec.params.delta_a;
  const double db = spec.params.delta_b;
  std::vector<double> grad(state.size(), 0.0);
  for (const BoundSpec& b : spec.bounds) {
    const double s = state[b.index];
    if (spec.kind == BarrierKind::Quadratic) {
      grad[b.index] = da * (b.s_min + b.s_max - 2.0 * s);
    } else {
      grad[b.index] = da * db * (clamped_exp(db * (b.s_min - s)) -
                                 clamped_exp(db * (s - b.s_max)));
    }
  }
  return grad;
}

double hdot_analytic(const BarrierSpec& spec, std::span<const double> state,
                     std::span<const double> state_dot) {
  if (state.size() != state_dot.size()) {
    throw std::domain_error("state and state_dot length mismatch");
  }
  const std::vector<double> grad = grad_h(spec, state);
  double hdot = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    hdot += grad[i] * state_dot[i];
  }
  return hdot;
}

double hdot_finite_difference(const BarrierSpec& spec,
                              std::span<const double> state_prev,
                              std::span<const double> state_curr, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (state_prev.size() != state_curr.size()) {
    throw std::domain_error("state_prev and state_curr length mismatch");
  }
  std::vector<double> rate(state_curr.size());
  for (std::size_t i = 0; i < rate.size(); ++i) {
    rate[i] = (state_curr[i] - state_prev[i]) / dt;
  }
  return hdot_analytic(spec, state_curr, rate);
}

double reward_bf(const BarrierSpec& spec, std::span<const double> state_prev,
                 std::span<const double> state_curr, double dt) {
  return hdot_finite_difference(spec, state_prev, state_curr, dt) +
         spec.barrier_gain * eval_h(spec, state_curr);
}

double shape_reward(double vanilla_r, double r_bf) {
  if (!std::isfinite(vanilla_r) || !std::isfinite(r_bf)) {
    throw std::domain_error("shape_reward: non-finite input");
  }
  return vanilla_r + r_bf;
}

double cartpole_quad_reward_closed_form(double theta, double omega, double phi,
                                        double delta_a) {
  if (!(phi > 0.0) || !(delta_a > 0.0)) {
    throw std::invalid_argument("phi and delta_a must be positive");
  }
  return 1.0 + delta_a * ((phi * phi - theta * theta) - 2.0 * theta * omega);
}

}  // namespace bfrl
