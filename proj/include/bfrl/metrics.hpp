#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bfrl/barrier.hpp"
#include "bfrl/cartpole.hpp"
#include "bfrl/run_record.hpp"

namespace bfrl {

// Episodic actuation energy: sum over steps and joints of joint displacement
// times applied torque. The signed form is the literal sum; the default
// unsigned form sums |delta * torque| since actuators spend energy in both
// directions. Mismatched array lengths throw std::runtime_error.
double episode_energy(const RunRecord& record, bool signed_energy = false);

// Episodic energy divided by squared mean velocity. v_mean == 0 throws
// std::domain_error.
double actuation_coefficient(double episodic_energy, double v_mean);

// One scalar per evaluation point for a single seed.
struct Curve {
  std::vector<double> x;  // training steps
  std::vector<double> y;
};

struct AggregateCurve {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std_dev;  // population std; zero for one seed
};

// Pointwise mean/std across per-seed curves sharing one x grid; a grid
// mismatch or empty input throws std::runtime_error.
AggregateCurve aggregate_over_seeds(const std::vector<Curve>& runs);

// First x at which the rolling mean of the last `window` (or fewer, near the
// start) values reaches `threshold`; nullopt when never reached. Empty curve
// throws std::runtime_error.
std::optional<double> convergence_step(const AggregateCurve& curve,
                                       double threshold, int window);

struct StabilizationParams {
  double tol = 0.05;        // rad
  double omega_tol = 0.2;   // rad/s
  int hold_steps = 50;
  bool operator==(const StabilizationParams&) const = default;
};

struct SweepRow {
  double init_angle = 0.0;  // rad
  bool stabilized = false;
  int steps = 0;            // steps until stabilized, or episode length
  double energy_signed = 0.0;
  double energy_unsigned = 0.0;
};

using DeterministicPolicy =
    std::function<std::vector<double>(const std::vector<double>&)>;

// Rolls the policy out from each initial pole angle. Stabilized means
// |theta| < tol and |omega| < omega_tol held for hold_steps consecutive
// steps; energy is accumulated up to the step completing the hold (or over
// the whole episode when it never stabilizes).
std::vector<SweepRow> stabilization_energy_sweep(
    const DeterministicPolicy& policy, const CartPoleParams& env_params,
    const std::vector<double>& initial_angles, const StabilizationParams& sp,
    std::uint64_t seed);

// Shaping terms implied by a logged trajectory: row 0 has no prior sample
// (zero hdot); later rows use consecutive logged states.
std::vector<double> recompute_shaping(const RunRecord& record,
                                      const BarrierSpec& spec, double dt);

// Exact offline-recompute audit: logged shaped rewards must equal
// shape_reward(vanilla, recomputed r_bf) bitwise.
bool audit_shaping(const RunRecord& record, const BarrierSpec& spec, double dt);

}  // namespace bfrl
