#include "bfrl/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "bfrl/seeding.hpp"

namespace bfrl {

double episode_energy(const RunRecord& record, bool signed_energy) {
  if (record.torques.size() != record.joint_deltas.size()) {
    throw std::runtime_error("episode_energy: torque/delta array length mismatch");
  }
  double energy = 0.0;
  for (std::size_t step = 0; step < record.torques.size(); ++step) {
    const auto& tau = record.torques[step];
    const auto& delta = record.joint_deltas[step];
    if (tau.size() != delta.size()) {
      throw std::runtime_error("episode_energy: joint count mismatch at step " +
                               std::to_string(step));
    }
    for (std::size_t j = 0; j < tau.size(); ++j) {
      const double work = delta[j] * tau[j];
      energy += signed_energy ? work : std::abs(work);
    }
  }
  return energy;
}

double actuation_coefficient(double episodic_energy, double v_mean) {
  if (v_mean == 0.0 || !std::isfinite(v_mean)) {
    throw std::domain_error("actuation_coefficient: undefined for v_mean = 0");
  }
  return episodic_energy / (v_mean * v_mean);
}

AggregateCurve aggregate_over_seeds(const std::vector<Curve>& runs) {
  if (runs.empty()) {
    throw std::runtime_error("aggregate_over_seeds: no curves");
  }
  const std::vector<double>& grid = runs.front().x;
  for (const Curve& run : runs) {
    if (run.x != grid || run.y.size() != grid.size()) {
      throw std::runtime_error("aggregate_over_seeds: x grid mismatch");
    }
  }
  AggregateCurve out;
  out.x = grid;
  out.mean.resize(grid.size());
  out.std_dev.resize(grid.size());
  const double n = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double sum = 0.0;
    for (const Curve& run : runs) sum += run.y[i];
    const double mean = sum / n;
    double sq = 0.0;
    for (const Curve& run : runs) {
      const double d = run.y[i] - mean;
      sq += d * d;
    }
    out.mean[i] = mean;
    out.std_dev[i] = std::sqrt(sq / n);
  }
  return out;
}

std::optional<double> convergence_step(const AggregateCurve& curve,
                                       double threshold, int window) {
  if (curve.x.empty() || curve.mean.size() != curve.x.size()) {
    throw std::runtime_error("convergence_step: empty or inconsistent curve");
  }
  if (window < 1) {
    throw std::invalid_argument("convergence_step: window must be >= 1");
  }
  double rolling = 0.0;
  for (std::size_t i = 0; i < curve.mean.size(); ++i) {
    rolling += curve.mean[i];
    const std::size_t w = static_cast<std::size_t>(window);
    if (i >= w) rolling -= curve.mean[i - w];
    const double count = static_cast<double>(std::min(i + 1, w));
    if (rolling / count >= threshold) {
      return curve.x[i];
    }
  }
  return std::nullopt;
}

std::vector<SweepRow> stabilization_energy_sweep(
    const DeterministicPolicy& policy, const CartPoleParams& env_params,
    const std::vector<double>& initial_angles, const StabilizationParams& sp,
    std::uint64_t seed) {
  std::vector<SweepRow> rows;
  rows.reserve(initial_angles.size());
  for (std::size_t k = 0; k < initial_angles.size(); ++k) {
    CartPoleParams params = env_params;
    params.init_angle = initial_angles[k];
    CartPoleEnv env(params);
    std::vector<double> state = env.reset(derive_seed(seed, k));

    SweepRow row;
    row.init_angle = initial_angles[k];
    int hold = 0;
    int step = 0;
    while (!env.done()) {
      const StepResult res = env.step(policy(state));
      ++step;
      for (std::size_t j = 0; j < res.joint_torque.size(); ++j) {
        const double work = res.joint_delta[j] * res.joint_torque[j];
        row.energy_signed += work;
        row.energy_unsigned += std::abs(work);
      }
      const double theta = res.next_state[0];
      const double omega = res.next_state[1];
      if (std::abs(theta) < sp.tol && std::abs(omega) < sp.omega_tol) {
        ++hold;
      } else {
        hold = 0;
      }
      if (hold >= sp.hold_steps) {
        row.stabilized = true;
        break;
      }
      state = res.next_state;
    }
    row.steps = step;
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> recompute_shaping(const RunRecord& record,
                                      const BarrierSpec& spec, double dt) {
  std::vector<double> terms(record.states.size());
  for (std::size_t k = 0; k < record.states.size(); ++k) {
    const std::vector<double>& prev = k == 0 ? record.states[0] : record.states[k - 1];
    terms[k] = reward_bf(spec, prev, record.states[k], dt);
  }
  return terms;
}

bool audit_shaping(const RunRecord& record, const BarrierSpec& spec, double dt) {
  if (record.shaped_rewards.size() != record.states.size() ||
      record.vanilla_rewards.size() != record.states.size()) {
    return false;
  }
  const std::vector<double> terms = recompute_shaping(record, spec, dt);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (record.shaped_rewards[k] !=
        shape_reward(record.vanilla_rewards[k], terms[k])) {
      return false;
    }
  }
  return true;
}

}  // namespace bfrl
