#include "bfrl/td3.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "bfrl/metrics.hpp"
#include "bfrl/seeding.hpp"

namespace bfrl {

void Td3Config::validate() const {
  if (!(discount > 0.0 && discount < 1.0)) {
    throw std::invalid_argument("td3: discount must be in (0, 1)");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("td3: tau must be in (0, 1]");
  }
  if (policy_delay < 1) {
    throw std::invalid_argument("td3: policy_delay must be >= 1");
  }
  if (target_noise_sigma < 0.0 || target_noise_clip < 0.0 ||
      exploration_noise_sigma < 0.0) {
    throw std::invalid_argument("td3: noise sigmas must be >= 0");
  }
  if (batch_size < 1 || warmup_steps < 0 || buffer_capacity == 0 ||
      train_steps < 0 || eval_interval < 1 || eval_episodes < 1) {
    throw std::invalid_argument("td3: invalid schedule parameters");
  }
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
    throw std::invalid_argument("td3: learning rates must be positive");
  }
  for (int h : hidden_sizes) {
    if (h < 1) throw std::invalid_argument("td3: hidden sizes must be >= 1");
  }
  if (static_cast<std::size_t>(batch_size) > buffer_capacity) {
    throw std::invalid_argument("td3: batch_size exceeds buffer capacity");
  }
}

namespace {

std::vector<int> actor_sizes(const EnvDescriptor& env, const Td3Config& cfg) {
  std::vector<int> sizes{env.state_dim};
  sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  sizes.push_back(env.action_dim);
  return sizes;
}

std::vector<int> critic_sizes(const EnvDescriptor& env, const Td3Config& cfg) {
  std::vector<int> sizes{env.state_dim + env.action_dim};
  sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  sizes.push_back(1);
  return sizes;
}

double action_scale(const EnvDescriptor& env) {
  // tanh output bound; symmetric action spaces are assumed by the actor.
  double scale = 0.0;
  for (int j = 0; j < env.action_dim; ++j) {
    scale = std::max(scale, std::max(std::abs(env.action_low[j]),
                                     std::abs(env.action_high[j])));
  }
  return scale;
}

}  // namespace

Td3Agent::Td3Agent(const EnvDescriptor& env, const Td3Config& cfg,
                   std::uint64_t seed)
    : env_(env), cfg_(cfg), rng_(derive_seed(seed, 0)) {
  cfg_.validate();
  std::mt19937_64 init_rng(derive_seed(seed, 1));
  actor_ = make_mlp(actor_sizes(env_, cfg_), OutputActivation::TanhScaled,
                    action_scale(env_), init_rng, cfg_.final_layer_scale);
  critic1_ = make_mlp(critic_sizes(env_, cfg_), OutputActivation::Identity, 1.0,
                      init_rng);
  critic2_ = make_mlp(critic_sizes(env_, cfg_), OutputActivation::Identity, 1.0,
                      init_rng);
  init_targets_and_optimizers();
}

Td3Agent::Td3Agent(Mlp actor, Mlp critic1, Mlp critic2,
                   const EnvDescriptor& env, const Td3Config& cfg,
                   std::uint64_t seed)
    : env_(env),
      cfg_(cfg),
      actor_(std::move(actor)),
      critic1_(std::move(critic1)),
      critic2_(std::move(critic2)),
      rng_(derive_seed(seed, 0)) {
  cfg_.validate();
  init_targets_and_optimizers();
}

void Td3Agent::init_targets_and_optimizers() {
  actor_target_ = actor_;
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
  actor_opt_ = make_adam(actor_, cfg_.actor_lr, cfg_.adam_beta1, cfg_.adam_beta2,
                         cfg_.adam_eps);
  critic1_opt_ = make_adam(critic1_, cfg_.critic_lr, cfg_.adam_beta1,
                           cfg_.adam_beta2, cfg_.adam_eps);
  critic2_opt_ = make_adam(critic2_, cfg_.critic_lr, cfg_.adam_beta1,
                           cfg_.adam_beta2, cfg_.adam_eps);
}

std::vector<double> Td3Agent::critic_input(std::span<const double> state,
                                           std::span<const double> action) const {
  std::vector<double> input;
  input.reserve(state.size() + action.size());
  input.insert(input.end(), state.begin(), state.end());
  input.insert(input.end(), action.begin(), action.end());
  return input;
}

std::vector<double> Td3Agent::select_action(std::span<const double> state,
                                            bool explore) {
  if (explore && explore_calls_ < cfg_.warmup_steps) {
    ++explore_calls_;
    std::vector<double> action(env_.action_dim);
    for (int j = 0; j < env_.action_dim; ++j) {
      std::uniform_real_distribution<double> dist(env_.action_low[j],
                                                  env_.action_high[j]);
      action[j] = dist(rng_);
    }
    return action;
  }
  std::vector<double> action = mlp_forward(actor_, state);
  if (explore) {
    ++explore_calls_;
    std::normal_distribution<double> noise(0.0, cfg_.exploration_noise_sigma);
    if (cfg_.exploration_noise_sigma > 0.0) {
      for (double& a : action) a += noise(rng_);
    }
  }
  for (int j = 0; j < env_.action_dim; ++j) {
    action[j] = std::clamp(action[j], env_.action_low[j], env_.action_high[j]);
  }
  return action;
}

Td3Agent::UpdateDiagnostics Td3Agent::update(ReplayBuffer& buffer) {
  if (buffer.size() < static_cast<std::size_t>(cfg_.batch_size)) {
    throw std::logic_error("td3: buffer smaller than batch size");
  }
  const std::vector<const Transition*> batch =
      buffer.sample(static_cast<std::size_t>(cfg_.batch_size));
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  // y = r + gamma * (1 - done) * min(Q1', Q2')(s', clip(pi'(s') + eps))
  std::vector<double> targets(batch.size());
  std::normal_distribution<double> smoothing(0.0, cfg_.target_noise_sigma);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    std::vector<double> next_action = mlp_forward(actor_target_, t.next_state);
    for (int j = 0; j < env_.action_dim; ++j) {
      double eps = 0.0;
      if (cfg_.target_noise_sigma > 0.0) {
        eps = std::clamp(smoothing(rng_), -cfg_.target_noise_clip,
                         cfg_.target_noise_clip);
      }
      next_action[j] = std::clamp(next_action[j] + eps, env_.action_low[j],
                                  env_.action_high[j]);
    }
    const std::vector<double> in = critic_input(t.next_state, next_action);
    const double q1 = mlp_forward(critic1_target_, in)[0];
    const double q2 = mlp_forward(critic2_target_, in)[0];
    targets[i] = t.reward +
                 cfg_.discount * (t.done ? 0.0 : 1.0) * std::min(q1, q2);
  }

  MlpGrads grads1 = zero_grads_like(critic1_);
  MlpGrads grads2 = zero_grads_like(critic2_);
  double loss1 = 0.0, loss2 = 0.0;
  ForwardCache cache;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    const std::vector<double> in = critic_input(t.state, t.action);
    const double q1 = mlp_forward(critic1_, in, &cache)[0];
    const double d1 = q1 - targets[i];
    loss1 += d1 * d1;
    mlp_backward(critic1_, cache, std::vector<double>{2.0 * d1 * inv_b}, grads1);
    const double q2 = mlp_forward(critic2_, in, &cache)[0];
    const double d2 = q2 - targets[i];
    loss2 += d2 * d2;
    mlp_backward(critic2_, cache, std::vector<double>{2.0 * d2 * inv_b}, grads2);
  }
  adam_step(critic1_opt_, critic1_, grads1);
  adam_step(critic2_opt_, critic2_, grads2);

  UpdateDiagnostics diag;
  diag.critic1_loss = loss1 * inv_b;
  diag.critic2_loss = loss2 * inv_b;

  ++updates_;
  if (updates_ % cfg_.policy_delay == 0) {
    // Ascend Q1(s, pi(s)) through the actor; critic parameters stay fixed.
    MlpGrads actor_grads = zero_grads_like(actor_);
    MlpGrads critic_scratch = zero_grads_like(critic1_);
    double actor_loss = 0.0;
    ForwardCache actor_cache, critic_cache;
    const std::vector<double> q_grad{-inv_b};
    for (const Transition* t : batch) {
      const std::vector<double> act = mlp_forward(actor_, t->state, &actor_cache);
      const std::vector<double> in = critic_input(t->state, act);
      const double q = mlp_forward(critic1_, in, &critic_cache)[0];
      actor_loss -= q;
      const std::vector<double> in_grad =
          mlp_backward(critic1_, critic_cache, q_grad, critic_scratch);
      const std::span<const double> act_grad(
          in_grad.data() + env_.state_dim,
          static_cast<std::size_t>(env_.action_dim));
      mlp_backward(actor_, actor_cache, act_grad, actor_grads);
    }
    adam_step(actor_opt_, actor_, actor_grads);
    polyak_update(actor_target_, actor_, cfg_.tau);
    polyak_update(critic1_target_, critic1_, cfg_.tau);
    polyak_update(critic2_target_, critic2_, cfg_.tau);
    diag.actor_loss = actor_loss * inv_b;
  }
  return diag;
}

bool Td3Agent::finite() const {
  return params_finite(actor_) && params_finite(critic1_) &&
         params_finite(critic2_) && params_finite(actor_target_) &&
         params_finite(critic1_target_) && params_finite(critic2_target_);
}

void Td3Agent::save(std::ostream& out) const {
  save_mlp(out, actor_);
  save_mlp(out, critic1_);
  save_mlp(out, critic2_);
  save_mlp(out, actor_target_);
  save_mlp(out, critic1_target_);
  save_mlp(out, critic2_target_);
}

void Td3Agent::load_networks(std::istream& in) {
  Mlp actor = load_mlp(in);
  Mlp critic1 = load_mlp(in);
  Mlp critic2 = load_mlp(in);
  Mlp actor_t = load_mlp(in);
  Mlp critic1_t = load_mlp(in);
  Mlp critic2_t = load_mlp(in);
  if (actor.sizes != actor_.sizes || critic1.sizes != critic1_.sizes ||
      critic2.sizes != critic2_.sizes) {
    throw std::runtime_error("checkpoint: architecture mismatch");
  }
  actor_ = std::move(actor);
  critic1_ = std::move(critic1);
  critic2_ = std::move(critic2);
  actor_target_ = std::move(actor_t);
  critic1_target_ = std::move(critic1_t);
  critic2_target_ = std::move(critic2_t);
}

EvalResult evaluate(Td3Agent& agent, Env& env, int episodes,
                    std::uint64_t seed) {
  if (episodes <= 0) {
    throw std::invalid_argument("evaluate: episodes must be >= 1");
  }
  EvalResult result;
  result.episodes.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<double> state =
        env.reset(derive_seed(seed, static_cast<std::uint64_t>(ep)));
    RunRecord rec;
    while (!env.done()) {
      const std::vector<double> action = agent.select_action(state, false);
      const StepResult res = env.step(action);
      rec.states.push_back(state);
      rec.actions.push_back(action);
      rec.vanilla_rewards.push_back(res.vanilla_reward);
      rec.shaped_rewards.push_back(res.shaped_reward);
      rec.torques.push_back(res.joint_torque);
      rec.joint_deltas.push_back(res.joint_delta);
      rec.vanilla_return += res.vanilla_reward;
      rec.shaped_return += res.shaped_reward;
      state = res.next_state;
    }
    rec.length = static_cast<int>(rec.states.size());
    result.mean_vanilla_return += rec.vanilla_return;
    result.mean_shaped_return += rec.shaped_return;
    result.episodes.push_back(std::move(rec));
  }
  result.mean_vanilla_return /= episodes;
  result.mean_shaped_return /= episodes;
  return result;
}

TrainResult train_td3(const EnvFactory& make_env, const EnvDescriptor& env_desc,
                      const Td3Config& cfg, std::uint64_t seed,
                      const EvalHook& on_eval) {
  cfg.validate();
  std::unique_ptr<Env> env = make_env();
  std::unique_ptr<Env> eval_env = make_env();

  TrainResult out;
  out.agent = std::make_unique<Td3Agent>(env_desc, cfg, derive_seed(seed, 10));
  ReplayBuffer buffer(cfg.buffer_capacity, derive_seed(seed, 20));

  std::uint64_t eval_index = 0;
  const auto run_eval = [&](long long step) {
    EvalResult er = evaluate(*out.agent, *eval_env, cfg.eval_episodes,
                             derive_seed(seed, 1'000'000 + eval_index));
    ++eval_index;
    EvalPoint point;
    point.train_step = step;
    point.mean_vanilla_return = er.mean_vanilla_return;
    point.mean_shaped_return = er.mean_shaped_return;
    for (const RunRecord& rec : er.episodes) {
      point.mean_energy_signed += episode_energy(rec, true);
      point.mean_energy_unsigned += episode_energy(rec, false);
    }
    point.mean_energy_signed /= static_cast<double>(er.episodes.size());
    point.mean_energy_unsigned /= static_cast<double>(er.episodes.size());
    out.curve.push_back(point);
    if (!std::isfinite(er.mean_shaped_return)) out.diverged = true;
    if (on_eval) on_eval(step, er);
  };

  run_eval(0);

  std::uint64_t episode = 0;
  int episode_len = 0;
  std::vector<double> state = env->reset(derive_seed(seed, 100 + episode));
  for (long long step = 1; step <= cfg.train_steps; ++step) {
    const std::vector<double> action = out.agent->select_action(state, true);
    StepResult res = env->step(action);
    ++episode_len;
    // Time-limit truncation bootstraps; genuine failures do not.
    const bool truncated =
        res.done && episode_len >= env_desc.max_episode_steps;
    Transition t;
    t.state = state;
    t.action = action;
    t.reward = res.shaped_reward;
    t.next_state = res.next_state;
    t.done = res.done && !truncated;
    buffer.push(std::move(t));
    state = std::move(res.next_state);
    if (res.done) {
      ++episode;
      episode_len = 0;
      state = env->reset(derive_seed(seed, 100 + episode));
    }
    if (step > cfg.warmup_steps &&
        buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      out.agent->update(buffer);
    }
    if (step % cfg.eval_interval == 0 || step == cfg.train_steps) {
      if (!out.agent->finite()) {
        out.diverged = true;
        break;
      }
      run_eval(step);
      if (out.diverged) break;
    }
  }
  return out;
}

}  // namespace bfrl
