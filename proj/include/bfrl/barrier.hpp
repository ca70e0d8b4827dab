#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bfrl {

// Barrier function shapes over bounded state variables.
//
//   h_quad(s) = sum_l  da * (s_l - max_l) * (min_l - s_l)
//   h_exp(s)  = sum_l  da * [1 - (e^{db(s_l - max_l)} + e^{db(min_l - s_l)})]
//
// h > 0 inside the bounds (strictly inside for the exponential kind),
// h = 0 on the quadratic boundary, h < 0 outside. Both are concave in each
// constrained coordinate with the maximum at the interval midpoint.
enum class BarrierKind { Quadratic, Exponential };

// One constrained entry of the state vector.
struct BoundSpec {
  std::size_t index = 0;
  double s_min = -1.0;
  double s_max = 1.0;
  bool operator==(const BoundSpec&) const = default;
};

struct BarrierParams {
  double delta_a = 1.0;  // amplitude
  double delta_b = 1.0;  // exponential steepness; unused by Quadratic
  bool operator==(const BarrierParams&) const = default;
};

struct BarrierSpec {
  BarrierKind kind = BarrierKind::Quadratic;
  std::vector<BoundSpec> bounds;
  BarrierParams params;
  // Gain of the class-K term in r_bf = hdot + gain * h. This is the shaping
  // gain, not the MDP discount factor.
  double barrier_gain = 1.0;
  bool operator==(const BarrierSpec&) const = default;
};

// Default steepness that keeps the exponential barrier visibly flat across
// the interior of the interval.
double default_delta_b(double s_min, double s_max);

// Throws std::invalid_argument when the spec violates its invariants
// (empty/duplicate bounds, s_min >= s_max, non-positive deltas or gain).
void validate_spec(const BarrierSpec& spec);

// Barrier value at `state`.
double eval_h(const BarrierSpec& spec, std::span<const double> state);

// dh/ds, dense over the full state; zero at unconstrained indices.
std::vector<double> grad_h(const BarrierSpec& spec, std::span<const double> state);

// hdot = dh/ds . state_dot, gradient evaluated at `state`.
double hdot_analytic(const BarrierSpec& spec, std::span<const double> state,
                     std::span<const double> state_dot);

// Backward-difference hdot: gradient at state_curr, rate (curr - prev) / dt.
double hdot_finite_difference(const BarrierSpec& spec,
                              std::span<const double> state_prev,
                              std::span<const double> state_curr, double dt);

// Shaping term r_bf = hdot_fd + gain * h(state_curr).
double reward_bf(const BarrierSpec& spec, std::span<const double> state_prev,
                 std::span<const double> state_curr, double dt);

// r' = r + r_bf.
double shape_reward(double vanilla_r, double r_bf);

// Closed form of the quadratic shaped reward for the cart-pole balance task
// with symmetric angle bounds (-phi, phi), unit gain and analytic hdot:
//   r' = 1 + da * ((phi^2 - theta^2) - 2 theta omega)
double cartpole_quad_reward_closed_form(double theta, double omega, double phi,
                                        double delta_a);

}  // namespace bfrl
