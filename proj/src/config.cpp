#include "bfrl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

#include "bfrl/shaped_env.hpp"

namespace bfrl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument(path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

long long get_integer(const json& obj, const std::string& path, const char* key,
                      long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<long long>();
}

std::optional<double> get_optional_number(const json& obj, const std::string& path,
                                          const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number or null");
  return v.get<double>();
}

std::vector<BoundSpec> parse_bounds(const json& arr, const std::string& path,
                                    const std::vector<std::string>& labels) {
  if (!arr.is_array() || arr.empty()) fail(path, "expected a non-empty array");
  std::vector<BoundSpec> bounds;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string bpath = path + "[" + std::to_string(i) + "]";
    const json& b = arr[i];
    require_object(b, bpath);
    check_keys(b, bpath, {"index", "label", "min", "max"});
    BoundSpec bound;
    if (b.contains("label")) {
      const std::string label = b.at("label").get<std::string>();
      const auto it = std::find(labels.begin(), labels.end(), label);
      if (it == labels.end()) fail(bpath + ".label", "unknown state label '" + label + "'");
      bound.index = static_cast<std::size_t>(it - labels.begin());
    } else if (b.contains("index")) {
      const long long idx = b.at("index").get<long long>();
      if (idx < 0 || static_cast<std::size_t>(idx) >= labels.size()) {
        fail(bpath + ".index", "out of range for this environment");
      }
      bound.index = static_cast<std::size_t>(idx);
    } else {
      fail(bpath, "needs 'index' or 'label'");
    }
    if (!b.contains("min") || !b.contains("max")) fail(bpath, "needs 'min' and 'max'");
    bound.s_min = b.at("min").get<double>();
    bound.s_max = b.at("max").get<double>();
    if (!(bound.s_min < bound.s_max)) fail(bpath, "min must be < max");
    bounds.push_back(bound);
  }
  return bounds;
}

json dump_bounds(const std::vector<BoundSpec>& bounds,
                 const std::vector<std::string>& labels) {
  json arr = json::array();
  for (const BoundSpec& b : bounds) {
    arr.push_back({{"label", labels[b.index]}, {"min", b.s_min}, {"max", b.s_max}});
  }
  return arr;
}

BarrierKind parse_kind(const std::string& name, const std::string& path) {
  if (name == "quad") return BarrierKind::Quadratic;
  if (name == "exp") return BarrierKind::Exponential;
  fail(path, "expected 'quad' or 'exp'");
}

}  // namespace

std::string to_string(RewardVariant v) {
  switch (v) {
    case RewardVariant::Vanilla: return "vanilla";
    case RewardVariant::Quad: return "quad";
    case RewardVariant::Exp: return "exp";
    case RewardVariant::Multi: return "multi";
  }
  return "?";
}

RewardVariant variant_from_string(const std::string& name) {
  if (name == "vanilla") return RewardVariant::Vanilla;
  if (name == "quad") return RewardVariant::Quad;
  if (name == "exp") return RewardVariant::Exp;
  if (name == "multi") return RewardVariant::Multi;
  throw std::invalid_argument("variants: unknown variant '" + name +
                              "' (expected vanilla|quad|exp|multi)");
}

ExperimentConfig parse_config(const json& j) {
  require_object(j, "config");
  check_keys(j, "config",
             {"environment", "variants", "barrier", "td3", "seeds", "output_dir",
              "sweep_angles_deg", "convergence", "stabilization", "max_workers",
              "grid_budget"});

  ExperimentConfig cfg;

  if (!j.contains("environment")) fail("environment", "required");
  const json& env = j.at("environment");
  require_object(env, "environment");
  if (!env.contains("name")) fail("environment.name", "required");
  cfg.env_name = env.at("name").get<std::string>();
  if (cfg.env_name == "cartpole") {
    check_keys(env, "environment",
               {"name", "cart_mass", "pole_mass", "pole_half_length", "gravity",
                "dt", "force_max", "track_limit", "termination_angle_rad",
                "max_episode_steps", "init_angle_rad"});
    CartPoleParams& p = cfg.cartpole;
    p.cart_mass = get_number(env, "environment", "cart_mass", p.cart_mass);
    p.pole_mass = get_number(env, "environment", "pole_mass", p.pole_mass);
    p.pole_half_length =
        get_number(env, "environment", "pole_half_length", p.pole_half_length);
    p.gravity = get_number(env, "environment", "gravity", p.gravity);
    p.dt = get_number(env, "environment", "dt", p.dt);
    p.force_max = get_number(env, "environment", "force_max", p.force_max);
    p.track_limit = get_number(env, "environment", "track_limit", p.track_limit);
    p.termination_angle = get_number(env, "environment", "termination_angle_rad",
                                     p.termination_angle);
    p.max_episode_steps = static_cast<int>(get_integer(
        env, "environment", "max_episode_steps", p.max_episode_steps));
    p.init_angle = get_optional_number(env, "environment", "init_angle_rad");
  } else if (cfg.env_name == "pendulum") {
    check_keys(env, "environment",
               {"name", "gravity", "mass", "length", "dt", "max_torque",
                "max_speed", "max_episode_steps", "init_theta_rad"});
    PendulumParams& p = cfg.pendulum;
    p.gravity = get_number(env, "environment", "gravity", p.gravity);
    p.mass = get_number(env, "environment", "mass", p.mass);
    p.length = get_number(env, "environment", "length", p.length);
    p.dt = get_number(env, "environment", "dt", p.dt);
    p.max_torque = get_number(env, "environment", "max_torque", p.max_torque);
    p.max_speed = get_number(env, "environment", "max_speed", p.max_speed);
    p.max_episode_steps = static_cast<int>(get_integer(
        env, "environment", "max_episode_steps", p.max_episode_steps));
    p.init_theta = get_optional_number(env, "environment", "init_theta_rad");
  } else {
    fail("environment.name", "unknown environment '" + cfg.env_name + "'");
  }

  if (!j.contains("variants")) fail("variants", "required");
  const json& variants = j.at("variants");
  if (!variants.is_array() || variants.empty()) {
    fail("variants", "expected a non-empty array");
  }
  for (const json& v : variants) {
    cfg.variants.push_back(variant_from_string(v.get<std::string>()));
  }
  for (std::size_t i = 0; i < cfg.variants.size(); ++i) {
    for (std::size_t k = i + 1; k < cfg.variants.size(); ++k) {
      if (cfg.variants[i] == cfg.variants[k]) fail("variants", "duplicate variant");
    }
  }

  if (!j.contains("seeds")) fail("seeds", "required");
  const json& seeds = j.at("seeds");
  if (!seeds.is_array() || seeds.empty()) fail("seeds", "expected a non-empty array");
  for (const json& s : seeds) {
    if (!s.is_number_integer()) fail("seeds", "expected integers");
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }

  const std::vector<std::string>& labels = env_descriptor(cfg).state_labels;

  const bool wants_quad_or_exp =
      std::any_of(cfg.variants.begin(), cfg.variants.end(), [](RewardVariant v) {
        return v == RewardVariant::Quad || v == RewardVariant::Exp;
      });
  const bool wants_exp = std::any_of(
      cfg.variants.begin(), cfg.variants.end(),
      [](RewardVariant v) { return v == RewardVariant::Exp; });
  const bool wants_multi = std::any_of(
      cfg.variants.begin(), cfg.variants.end(),
      [](RewardVariant v) { return v == RewardVariant::Multi; });

  if (j.contains("barrier")) {
    const json& b = j.at("barrier");
    require_object(b, "barrier");
    check_keys(b, "barrier",
               {"bounds", "delta_a", "delta_b", "barrier_gain", "multi"});
    if (b.contains("bounds")) {
      cfg.barrier.bounds = parse_bounds(b.at("bounds"), "barrier.bounds", labels);
    }
    cfg.barrier.delta_a = get_number(b, "barrier", "delta_a", cfg.barrier.delta_a);
    cfg.barrier.delta_b = get_optional_number(b, "barrier", "delta_b");
    cfg.barrier.barrier_gain =
        get_number(b, "barrier", "barrier_gain", cfg.barrier.barrier_gain);
    if (b.contains("multi")) {
      const json& m = b.at("multi");
      require_object(m, "barrier.multi");
      check_keys(m, "barrier.multi", {"kind", "bounds"});
      if (m.contains("kind")) {
        cfg.barrier.multi_kind =
            parse_kind(m.at("kind").get<std::string>(), "barrier.multi.kind");
      }
      if (m.contains("bounds")) {
        cfg.barrier.multi_bounds =
            parse_bounds(m.at("bounds"), "barrier.multi.bounds", labels);
      }
    }
  }
  // The pole-angle threshold is the one barrier most experiments need; fill
  // it in for cart-pole when the config names none.
  if (cfg.barrier.bounds.empty() && cfg.env_name == "cartpole") {
    constexpr double phi = 0.20943951023931953;  // 12 deg
    cfg.barrier.bounds.push_back(BoundSpec{0, -phi, phi});
  }
  if (wants_quad_or_exp && cfg.barrier.bounds.empty()) {
    fail("barrier.bounds", "required for quad/exp variants of this environment");
  }
  if (wants_exp && !cfg.barrier.delta_b) {
    fail("barrier.delta_b", "required for variant 'exp'");
  }
  if (wants_multi) {
    if (cfg.barrier.multi_bounds.empty()) {
      fail("barrier.multi.bounds", "required for variant 'multi'");
    }
    if (cfg.barrier.multi_kind == BarrierKind::Exponential && !cfg.barrier.delta_b) {
      fail("barrier.delta_b", "required for an exponential multi barrier");
    }
  }

  {
    const json t = j.contains("td3") ? j.at("td3") : json::object();
    require_object(t, "td3");
    check_keys(t, "td3",
               {"discount", "tau", "policy_delay", "target_noise_sigma",
                "target_noise_clip", "exploration_noise_sigma", "batch_size",
                "warmup_steps", "buffer_capacity", "train_steps", "eval_interval",
                "eval_episodes", "actor_lr", "critic_lr", "hidden_sizes",
                "adam_beta1", "adam_beta2", "adam_eps", "final_layer_scale"});
    Td3Config& c = cfg.td3;
    c.discount = get_number(t, "td3", "discount", c.discount);
    c.tau = get_number(t, "td3", "tau", c.tau);
    c.policy_delay =
        static_cast<int>(get_integer(t, "td3", "policy_delay", c.policy_delay));
    c.target_noise_sigma =
        get_number(t, "td3", "target_noise_sigma", c.target_noise_sigma);
    c.target_noise_clip =
        get_number(t, "td3", "target_noise_clip", c.target_noise_clip);
    c.batch_size =
        static_cast<int>(get_integer(t, "td3", "batch_size", c.batch_size));
    c.warmup_steps =
        static_cast<int>(get_integer(t, "td3", "warmup_steps", c.warmup_steps));
    c.buffer_capacity = static_cast<std::size_t>(get_integer(
        t, "td3", "buffer_capacity", static_cast<long long>(c.buffer_capacity)));
    c.train_steps = get_integer(t, "td3", "train_steps", c.train_steps);
    c.eval_interval =
        static_cast<int>(get_integer(t, "td3", "eval_interval", c.eval_interval));
    c.eval_episodes =
        static_cast<int>(get_integer(t, "td3", "eval_episodes", c.eval_episodes));
    c.actor_lr = get_number(t, "td3", "actor_lr", c.actor_lr);
    c.critic_lr = get_number(t, "td3", "critic_lr", c.critic_lr);
    if (t.contains("hidden_sizes")) {
      const json& h = t.at("hidden_sizes");
      if (!h.is_array() || h.empty()) fail("td3.hidden_sizes", "expected a non-empty array");
      c.hidden_sizes.clear();
      for (const json& x : h) c.hidden_sizes.push_back(x.get<int>());
    }
    c.adam_beta1 = get_number(t, "td3", "adam_beta1", c.adam_beta1);
    c.adam_beta2 = get_number(t, "td3", "adam_beta2", c.adam_beta2);
    c.adam_eps = get_number(t, "td3", "adam_eps", c.adam_eps);
    c.final_layer_scale =
        get_number(t, "td3", "final_layer_scale", c.final_layer_scale);
    if (const auto sigma = get_optional_number(t, "td3", "exploration_noise_sigma")) {
      c.exploration_noise_sigma = *sigma;
    } else {
      const EnvDescriptor desc = env_descriptor(cfg);
      double half_range = 0.0;
      for (int d = 0; d < desc.action_dim; ++d) {
        half_range = std::max(half_range,
                              (desc.action_high[d] - desc.action_low[d]) / 2.0);
      }
      c.exploration_noise_sigma = 0.1 * half_range;
    }
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      fail("td3", e.what());
    }
  }

  cfg.output_dir = j.value("output_dir", cfg.output_dir);

  if (j.contains("sweep_angles_deg")) {
    const json& a = j.at("sweep_angles_deg");
    if (!a.is_array()) fail("sweep_angles_deg", "expected an array");
    for (const json& x : a) cfg.sweep_angles_deg.push_back(x.get<double>());
  }

  if (j.contains("convergence")) {
    const json& c = j.at("convergence");
    require_object(c, "convergence");
    check_keys(c, "convergence", {"threshold", "window"});
    cfg.convergence.threshold = get_optional_number(c, "convergence", "threshold");
    cfg.convergence.window = static_cast<int>(
        get_integer(c, "convergence", "window", cfg.convergence.window));
    if (cfg.convergence.window < 1) fail("convergence.window", "must be >= 1");
  }

  if (j.contains("stabilization")) {
    const json& s = j.at("stabilization");
    require_object(s, "stabilization");
    check_keys(s, "stabilization", {"tol_rad", "omega_tol_rad", "hold_steps"});
    cfg.stabilization.tol =
        get_number(s, "stabilization", "tol_rad", cfg.stabilization.tol);
    cfg.stabilization.omega_tol = get_number(s, "stabilization", "omega_tol_rad",
                                             cfg.stabilization.omega_tol);
    cfg.stabilization.hold_steps = static_cast<int>(get_integer(
        s, "stabilization", "hold_steps", cfg.stabilization.hold_steps));
    if (cfg.stabilization.hold_steps < 1) fail("stabilization.hold_steps", "must be >= 1");
  }

  cfg.max_workers =
      static_cast<int>(get_integer(j, "config", "max_workers", cfg.max_workers));
  if (cfg.max_workers < 0) fail("max_workers", "must be >= 0");
  cfg.grid_budget = get_integer(j, "config", "grid_budget", cfg.grid_budget);
  if (cfg.grid_budget < 1) fail("grid_budget", "must be >= 1");

  // Surface bad environment constants now rather than mid-run.
  try {
    make_configured_env(cfg, RewardVariant::Vanilla);
    for (RewardVariant v : cfg.variants) make_configured_env(cfg, v);
  } catch (const std::invalid_argument& e) {
    fail("environment", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: parse error in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

nlohmann::json dump_config(const ExperimentConfig& cfg) {
  json env{{"name", cfg.env_name}};
  if (cfg.env_name == "cartpole") {
    const CartPoleParams& p = cfg.cartpole;
    env["cart_mass"] = p.cart_mass;
    env["pole_mass"] = p.pole_mass;
    env["pole_half_length"] = p.pole_half_length;
    env["gravity"] = p.gravity;
    env["dt"] = p.dt;
    env["force_max"] = p.force_max;
    env["track_limit"] = p.track_limit;
    env["termination_angle_rad"] = p.termination_angle;
    env["max_episode_steps"] = p.max_episode_steps;
    if (p.init_angle) env["init_angle_rad"] = *p.init_angle;
  } else {
    const PendulumParams& p = cfg.pendulum;
    env["gravity"] = p.gravity;
    env["mass"] = p.mass;
    env["length"] = p.length;
    env["dt"] = p.dt;
    env["max_torque"] = p.max_torque;
    env["max_speed"] = p.max_speed;
    env["max_episode_steps"] = p.max_episode_steps;
    if (p.init_theta) env["init_theta_rad"] = *p.init_theta;
  }

  json variants = json::array();
  for (RewardVariant v : cfg.variants) variants.push_back(to_string(v));

  const std::vector<std::string>& labels = env_descriptor(cfg).state_labels;
  json barrier{{"bounds", dump_bounds(cfg.barrier.bounds, labels)},
               {"delta_a", cfg.barrier.delta_a},
               {"barrier_gain", cfg.barrier.barrier_gain}};
  if (cfg.barrier.delta_b) barrier["delta_b"] = *cfg.barrier.delta_b;
  if (!cfg.barrier.multi_bounds.empty()) {
    barrier["multi"] = {
        {"kind", cfg.barrier.multi_kind == BarrierKind::Exponential ? "exp" : "quad"},
        {"bounds", dump_bounds(cfg.barrier.multi_bounds, labels)}};
  }

  const Td3Config& t = cfg.td3;
  json td3{{"discount", t.discount},
           {"tau", t.tau},
           {"policy_delay", t.policy_delay},
           {"target_noise_sigma", t.target_noise_sigma},
           {"target_noise_clip", t.target_noise_clip},
           {"exploration_noise_sigma", t.exploration_noise_sigma},
           {"batch_size", t.batch_size},
           {"warmup_steps", t.warmup_steps},
           {"buffer_capacity", t.buffer_capacity},
           {"train_steps", t.train_steps},
           {"eval_interval", t.eval_interval},
           {"eval_episodes", t.eval_episodes},
           {"actor_lr", t.actor_lr},
           {"critic_lr", t.critic_lr},
           {"hidden_sizes", t.hidden_sizes},
           {"adam_beta1", t.adam_beta1},
           {"adam_beta2", t.adam_beta2},
           {"adam_eps", t.adam_eps},
           {"final_layer_scale", t.final_layer_scale}};

  json out{{"environment", env},
           {"variants", variants},
           {"barrier", barrier},
           {"td3", td3},
           {"seeds", cfg.seeds},
           {"output_dir", cfg.output_dir},
           {"stabilization",
            {{"tol_rad", cfg.stabilization.tol},
             {"omega_tol_rad", cfg.stabilization.omega_tol},
             {"hold_steps", cfg.stabilization.hold_steps}}},
           {"max_workers", cfg.max_workers},
           {"grid_budget", cfg.grid_budget}};
  if (!cfg.sweep_angles_deg.empty()) out["sweep_angles_deg"] = cfg.sweep_angles_deg;
  json convergence{{"window", cfg.convergence.window}};
  if (cfg.convergence.threshold) convergence["threshold"] = *cfg.convergence.threshold;
  out["convergence"] = convergence;
  return out;
}

EnvDescriptor env_descriptor(const ExperimentConfig& cfg) {
  if (cfg.env_name == "cartpole") return CartPoleEnv(cfg.cartpole).descriptor();
  return PendulumEnv(cfg.pendulum).descriptor();
}

BarrierSpec barrier_spec_for(const ExperimentConfig& cfg, RewardVariant v) {
  BarrierSpec spec;
  spec.barrier_gain = cfg.barrier.barrier_gain;
  spec.params.delta_a = cfg.barrier.delta_a;
  spec.params.delta_b = cfg.barrier.delta_b.value_or(1.0);
  switch (v) {
    case RewardVariant::Quad:
      spec.kind = BarrierKind::Quadratic;
      spec.bounds = cfg.barrier.bounds;
      break;
    case RewardVariant::Exp:
      spec.kind = BarrierKind::Exponential;
      spec.bounds = cfg.barrier.bounds;
      break;
    case RewardVariant::Multi:
      spec.kind = cfg.barrier.multi_kind;
      spec.bounds = cfg.barrier.multi_bounds;
      break;
    case RewardVariant::Vanilla:
      throw std::invalid_argument("vanilla variant has no barrier spec");
  }
  validate_spec(spec);
  return spec;
}

std::unique_ptr<Env> make_configured_env(const ExperimentConfig& cfg,
                                         RewardVariant v) {
  std::unique_ptr<Env> env;
  if (cfg.env_name == "cartpole") {
    env = std::make_unique<CartPoleEnv>(cfg.cartpole);
  } else {
    env = std::make_unique<PendulumEnv>(cfg.pendulum);
  }
  if (v == RewardVariant::Vanilla) return env;
  return attach_shaping(std::move(env), barrier_spec_for(cfg, v));
}

GridSearchSpec parse_grid(const json& j) {
  require_object(j, "grid");
  check_keys(j, "grid", {"delta_a", "delta_b", "barrier_gain", "metric"});
  GridSearchSpec grid;
  const auto read_list = [&](const char* key, std::vector<double>& out) {
    if (!j.contains(key)) fail(std::string("grid.") + key, "required");
    const json& arr = j.at(key);
    if (!arr.is_array() || arr.empty()) {
      fail(std::string("grid.") + key, "expected a non-empty array");
    }
    for (const json& x : arr) out.push_back(x.get<double>());
  };
  read_list("delta_a", grid.delta_a);
  read_list("delta_b", grid.delta_b);
  read_list("barrier_gain", grid.barrier_gain);
  if (!j.contains("metric")) fail("grid.metric", "required");
  grid.metric = j.at("metric").get<std::string>();
  if (grid.metric != "convergence_step" && grid.metric != "final_vanilla_return" &&
      grid.metric != "stabilization_energy") {
    fail("grid.metric",
         "expected convergence_step|final_vanilla_return|stabilization_energy");
  }
  return grid;
}

GridSearchSpec load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("grid: cannot open '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("grid: parse error in '" + path + "': " + e.what());
  }
  return parse_grid(j);
}

}  // namespace bfrl
