#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bfrl/barrier.hpp"
#include "bfrl/cartpole.hpp"
#include "bfrl/env.hpp"
#include "bfrl/metrics.hpp"
#include "bfrl/pendulum.hpp"
#include "bfrl/td3.hpp"

namespace bfrl {

enum class RewardVariant { Vanilla, Quad, Exp, Multi };

std::string to_string(RewardVariant v);
RewardVariant variant_from_string(const std::string& name);

struct BarrierSettings {
  std::vector<BoundSpec> bounds;  // used by quad/exp; defaulted for cartpole
  double delta_a = 1.0;
  std::optional<double> delta_b;  // required for the exp variant
  double barrier_gain = 1.0;
  BarrierKind multi_kind = BarrierKind::Quadratic;
  std::vector<BoundSpec> multi_bounds;  // required for the multi variant
  bool operator==(const BarrierSettings&) const = default;
};

struct ConvergenceParams {
  std::optional<double> threshold;  // vanilla-return units
  int window = 5;
  bool operator==(const ConvergenceParams&) const = default;
};

struct ExperimentConfig {
  std::string env_name = "cartpole";  // "cartpole" | "pendulum"
  CartPoleParams cartpole;
  PendulumParams pendulum;
  std::vector<RewardVariant> variants;
  BarrierSettings barrier;
  Td3Config td3;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  std::vector<double> sweep_angles_deg;  // stabilization sweep start angles
  ConvergenceParams convergence;
  StabilizationParams stabilization;
  int max_workers = 0;  // 0 -> hardware concurrency
  long long grid_budget = 64;
  bool operator==(const ExperimentConfig&) const = default;
};

// Parses, defaults and validates; unknown keys and missing variant-required
// fields are rejected with their field path. Configuration problems throw
// std::invalid_argument.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Full effective configuration, defaults included; parse(dump(c)) == c.
nlohmann::json dump_config(const ExperimentConfig& config);

EnvDescriptor env_descriptor(const ExperimentConfig& config);

// Barrier spec the given shaped variant resolves to (Vanilla is invalid here).
BarrierSpec barrier_spec_for(const ExperimentConfig& config, RewardVariant v);

// Fresh environment for one variant, shaped when the variant asks for it.
std::unique_ptr<Env> make_configured_env(const ExperimentConfig& config,
                                         RewardVariant v);

struct GridSearchSpec {
  std::vector<double> delta_a;
  std::vector<double> delta_b;
  std::vector<double> barrier_gain;
  std::string metric;  // convergence_step | final_vanilla_return | stabilization_energy
};

GridSearchSpec parse_grid(const nlohmann::json& j);
GridSearchSpec load_grid(const std::string& path);

}  // namespace bfrl
