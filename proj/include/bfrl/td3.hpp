#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>

#include "bfrl/adam.hpp"
#include "bfrl/env.hpp"
#include "bfrl/mlp.hpp"
#include "bfrl/replay_buffer.hpp"
#include "bfrl/run_record.hpp"

namespace bfrl {

struct Td3Config {
  double discount = 0.99;  // MDP discount factor, not the barrier gain
  double tau = 0.005;
  int policy_delay = 2;
  double target_noise_sigma = 0.2;
  double target_noise_clip = 0.5;
  double exploration_noise_sigma = 0.1;  // absolute units of the action
  int batch_size = 256;
  int warmup_steps = 1000;
  std::size_t buffer_capacity = 100000;
  long long train_steps = 60000;
  int eval_interval = 1000;
  int eval_episodes = 5;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  std::vector<int> hidden_sizes = {256, 256};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double final_layer_scale = 0.01;

  void validate() const;  // throws std::invalid_argument
  bool operator==(const Td3Config&) const = default;
};

// Twin critics, delayed actor updates, target policy smoothing.
class Td3Agent {
 public:
  Td3Agent(const EnvDescriptor& env, const Td3Config& cfg, std::uint64_t seed);
  // Assembles an agent around prebuilt networks; targets start as copies.
  Td3Agent(Mlp actor, Mlp critic1, Mlp critic2, const EnvDescriptor& env,
           const Td3Config& cfg, std::uint64_t seed);

  // Deterministic actor output when explore is false. With explore, Gaussian
  // noise is added and, for the first warmup_steps exploring calls, the
  // action is drawn uniformly from the bounds instead. Always clipped.
  std::vector<double> select_action(std::span<const double> state, bool explore);

  struct UpdateDiagnostics {
    double critic1_loss = 0.0;
    double critic2_loss = 0.0;
    std::optional<double> actor_loss;  // set on policy-delay updates
  };

  // One gradient step on both critics; every policy_delay-th call also
  // updates the actor and Polyak-averages all targets.
  UpdateDiagnostics update(ReplayBuffer& buffer);

  long long update_count() const { return updates_; }
  const EnvDescriptor& env_descriptor() const { return env_; }
  const Td3Config& config() const { return cfg_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic1_target() const { return critic1_target_; }
  const Mlp& critic2_target() const { return critic2_target_; }

  bool finite() const;

  // Six networks in fixed order: actor, critic1, critic2, then targets.
  void save(std::ostream& out) const;
  void load_networks(std::istream& in);

 private:
  void init_targets_and_optimizers();
  std::vector<double> critic_input(std::span<const double> state,
                                   std::span<const double> action) const;

  EnvDescriptor env_;
  Td3Config cfg_;
  Mlp actor_, critic1_, critic2_;
  Mlp actor_target_, critic1_target_, critic2_target_;
  AdamState actor_opt_, critic1_opt_, critic2_opt_;
  long long updates_ = 0;
  long long explore_calls_ = 0;
  std::mt19937_64 rng_;
};

// Deterministic evaluation rollouts (no exploration noise). Vanilla return is
// the cross-variant comparison metric; shaped return is logged alongside.
struct EvalResult {
  double mean_shaped_return = 0.0;
  double mean_vanilla_return = 0.0;
  std::vector<RunRecord> episodes;
};

EvalResult evaluate(Td3Agent& agent, Env& env, int episodes, std::uint64_t seed);

struct EvalPoint {
  long long train_step = 0;
  double mean_vanilla_return = 0.0;
  double mean_shaped_return = 0.0;
  double mean_energy_signed = 0.0;
  double mean_energy_unsigned = 0.0;
};

struct TrainResult {
  std::vector<EvalPoint> curve;  // includes the untrained policy at step 0
  std::unique_ptr<Td3Agent> agent;
  bool diverged = false;
};

// Called with every evaluation's full records before they are discarded.
using EvalHook = std::function<void(long long train_step, const EvalResult&)>;

// Single-stream training: one environment, one update per step past warmup.
// Time-limit truncation is not stored as terminal, so the critic bootstraps
// through it; genuine failure states cut the bootstrap off.
TrainResult train_td3(const EnvFactory& make_env, const EnvDescriptor& env_desc,
                      const Td3Config& cfg, std::uint64_t seed,
                      const EvalHook& on_eval = {});

}  // namespace bfrl
