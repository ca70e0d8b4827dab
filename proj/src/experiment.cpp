#include "bfrl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <thread>

#include "bfrl/csv.hpp"
#include "bfrl/seeding.hpp"

namespace bfrl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

std::vector<double> sweep_angles_rad(const ExperimentConfig& cfg) {
  std::vector<double> rad;
  rad.reserve(cfg.sweep_angles_deg.size());
  for (double deg : cfg.sweep_angles_deg) rad.push_back(deg_to_rad(deg));
  return rad;
}

// Median with never-converged runs counted as infinity.
double median_or_inf(std::vector<std::optional<double>> values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (const auto& x : values) v.push_back(x.value_or(kInf));
  if (v.empty()) return kInf;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

JobResult run_job(const ExperimentConfig& cfg, RewardVariant variant,
                  std::uint64_t seed, bool write_checkpoint) {
  JobResult job;
  job.variant = variant;
  job.seed = seed;

  const EnvDescriptor desc = env_descriptor(cfg);
  const EnvFactory factory = [&cfg, variant] {
    return make_configured_env(cfg, variant);
  };

  EvalHook audit_hook;
  if (variant != RewardVariant::Vanilla) {
    const BarrierSpec spec = barrier_spec_for(cfg, variant);
    const double dt = desc.dt;
    audit_hook = [&job, spec, dt](long long, const EvalResult& er) {
      for (const RunRecord& rec : er.episodes) {
        if (!audit_shaping(rec, spec, dt)) job.audit_ok = false;
      }
    };
  }

  TrainResult trained = train_td3(factory, desc, cfg.td3, seed, audit_hook);
  job.curve = std::move(trained.curve);
  job.diverged = trained.diverged;
  if (!job.curve.empty()) {
    job.final_vanilla_return = job.curve.back().mean_vanilla_return;
  }

  if (cfg.convergence.threshold) {
    Curve c;
    for (const EvalPoint& p : job.curve) {
      c.x.push_back(static_cast<double>(p.train_step));
      c.y.push_back(p.mean_vanilla_return);
    }
    if (!c.x.empty()) {
      job.convergence_step =
          convergence_step(aggregate_over_seeds({c}), *cfg.convergence.threshold,
                           cfg.convergence.window);
    }
  }

  if (cfg.env_name == "cartpole" && !cfg.sweep_angles_deg.empty() &&
      !job.diverged) {
    Td3Agent& agent = *trained.agent;
    const DeterministicPolicy policy = [&agent](const std::vector<double>& s) {
      return agent.select_action(s, false);
    };
    job.sweep = stabilization_energy_sweep(policy, cfg.cartpole,
                                           sweep_angles_rad(cfg),
                                           cfg.stabilization,
                                           derive_seed(seed, 555));
  }

  if (write_checkpoint) {
    const fs::path dir(cfg.output_dir);
    const fs::path ckpt =
        dir / ("ckpt_" + to_string(variant) + "_seed" + std::to_string(seed) + ".bin");
    std::ofstream out(ckpt, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + ckpt.string());
    trained.agent->save(out);
    out.close();
    json meta{{"config", dump_config(cfg)},
              {"variant", to_string(variant)},
              {"seed", seed}};
    std::ofstream meta_out(ckpt.string() + ".meta.json");
    meta_out << meta.dump(2) << '\n';
    job.checkpoint_path = ckpt.string();
  }
  return job;
}

std::vector<JobResult> run_jobs(const ExperimentConfig& cfg, bool write_checkpoints) {
  struct JobSpec {
    RewardVariant variant;
    std::uint64_t seed;
  };
  std::vector<JobSpec> specs;
  for (RewardVariant v : cfg.variants) {
    for (std::uint64_t s : cfg.seeds) specs.push_back({v, s});
  }
  std::vector<JobResult> results(specs.size());

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(
      specs.size(), cfg.max_workers > 0 ? static_cast<unsigned>(cfg.max_workers) : hw);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      try {
        results[i] = run_job(cfg, specs[i].variant, specs[i].seed, write_checkpoints);
      } catch (const std::exception& e) {
        results[i].variant = specs[i].variant;
        results[i].seed = specs[i].seed;
        results[i].diverged = true;
        results[i].error = e.what();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return results;
}

struct VariantSummary {
  std::vector<std::optional<double>> convergence_steps;
  std::vector<double> final_returns;          // non-failed seeds
  std::vector<std::uint64_t> failed_seeds;
  std::vector<double> sweep_energy_unsigned;  // per seed means
  std::vector<double> sweep_energy_signed;
  bool audit_ok = true;
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  ExperimentResult result;
  result.jobs = run_jobs(cfg, true);

  CsvWriter curve_csv({"variant", "seed", "train_step", "eval_vanilla_return",
                       "eval_shaped_return", "episode_energy_signed",
                       "episode_energy_unsigned"});
  for (const JobResult& job : result.jobs) {
    for (const EvalPoint& p : job.curve) {
      curve_csv.add_field(to_string(job.variant));
      curve_csv.add_field(job.seed);
      curve_csv.add_field(p.train_step);
      curve_csv.add_field(p.mean_vanilla_return);
      curve_csv.add_field(p.mean_shaped_return);
      curve_csv.add_field(p.mean_energy_signed);
      curve_csv.add_field(p.mean_energy_unsigned);
      curve_csv.end_row();
    }
  }
  result.curve_csv_path = (fs::path(cfg.output_dir) / "curve.csv").string();
  curve_csv.write_file(result.curve_csv_path);

  const bool has_sweep =
      std::any_of(result.jobs.begin(), result.jobs.end(),
                  [](const JobResult& j) { return !j.sweep.empty(); });
  if (has_sweep) {
    CsvWriter sweep_csv({"variant", "seed", "init_angle_rad", "stabilized",
                         "steps", "energy_signed", "energy_unsigned"});
    for (const JobResult& job : result.jobs) {
      for (const SweepRow& row : job.sweep) {
        sweep_csv.add_field(to_string(job.variant));
        sweep_csv.add_field(job.seed);
        sweep_csv.add_field(row.init_angle);
        sweep_csv.add_field(row.stabilized);
        sweep_csv.add_field(static_cast<long long>(row.steps));
        sweep_csv.add_field(row.energy_signed);
        sweep_csv.add_field(row.energy_unsigned);
        sweep_csv.end_row();
      }
    }
    result.sweep_csv_path = (fs::path(cfg.output_dir) / "sweep.csv").string();
    sweep_csv.write_file(result.sweep_csv_path);
  }

  std::vector<std::string> variant_names;
  std::map<std::string, VariantSummary> by_variant;
  for (const JobResult& job : result.jobs) {
    const std::string name = to_string(job.variant);
    if (!by_variant.count(name)) variant_names.push_back(name);
    VariantSummary& vs = by_variant[name];
    if (job.diverged || !job.error.empty()) {
      vs.failed_seeds.push_back(job.seed);
      continue;
    }
    vs.convergence_steps.push_back(job.convergence_step);
    vs.final_returns.push_back(job.final_vanilla_return);
    if (!job.audit_ok) vs.audit_ok = false;
    if (!job.sweep.empty()) {
      double su = 0.0, ss = 0.0;
      for (const SweepRow& row : job.sweep) {
        su += row.energy_unsigned;
        ss += row.energy_signed;
      }
      vs.sweep_energy_unsigned.push_back(su / static_cast<double>(job.sweep.size()));
      vs.sweep_energy_signed.push_back(ss / static_cast<double>(job.sweep.size()));
    }
  }

  json summary;
  summary["environment"] = cfg.env_name;
  summary["seeds"] = cfg.seeds;
  summary["convergence_window"] = cfg.convergence.window;
  if (cfg.convergence.threshold) {
    summary["convergence_threshold"] = *cfg.convergence.threshold;
  }

  const bool have_vanilla = by_variant.count("vanilla") > 0;
  const double vanilla_median =
      have_vanilla ? median_or_inf(by_variant["vanilla"].convergence_steps) : kInf;
  const double vanilla_energy =
      have_vanilla ? mean_of(by_variant["vanilla"].sweep_energy_unsigned) : kInf;

  json variants = json::object();
  for (const std::string& name : variant_names) {
    const VariantSummary& vs = by_variant[name];
    json v;
    v["failed_seeds"] = vs.failed_seeds;
    v["audit_ok"] = vs.audit_ok;
    json conv = json::array();
    for (const auto& c : vs.convergence_steps) {
      conv.push_back(c ? json(*c) : json(nullptr));
    }
    v["per_seed_convergence_step"] = conv;
    const double med = median_or_inf(vs.convergence_steps);
    v["median_convergence_step"] = number_or_null(med);
    v["final_vanilla_return_per_seed"] = vs.final_returns;
    v["final_vanilla_return_mean"] = number_or_null(mean_of(vs.final_returns));
    if (!vs.sweep_energy_unsigned.empty()) {
      v["sweep_mean_energy_unsigned"] = mean_of(vs.sweep_energy_unsigned);
      v["sweep_mean_energy_signed"] = mean_of(vs.sweep_energy_signed);
    }
    if (have_vanilla && name != "vanilla") {
      v["speedup_vs_vanilla"] = number_or_null(vanilla_median / med);
      if (!vs.sweep_energy_unsigned.empty() && std::isfinite(vanilla_energy) &&
          vanilla_energy != 0.0) {
        v["energy_ratio_vs_vanilla"] =
            number_or_null(mean_of(vs.sweep_energy_unsigned) / vanilla_energy);
      }
    }
    variants[name] = v;
  }
  summary["variants"] = variants;
  result.summary = summary;

  result.summary_json_path = (fs::path(cfg.output_dir) / "summary.json").string();
  std::ofstream out(result.summary_json_path);
  out << summary.dump(2) << '\n';
  return result;
}

namespace {

RewardVariant shaped_variant_of(const ExperimentConfig& cfg) {
  for (RewardVariant v : cfg.variants) {
    if (v != RewardVariant::Vanilla) return v;
  }
  throw std::invalid_argument(
      "grid search needs a shaped variant (quad/exp/multi) in 'variants'");
}

double default_grid_metric(const ExperimentConfig& point_cfg,
                           const GridSearchSpec& grid) {
  std::vector<JobResult> jobs = run_jobs(point_cfg, false);
  if (grid.metric == "convergence_step") {
    std::vector<std::optional<double>> steps;
    for (const JobResult& j : jobs) steps.push_back(j.convergence_step);
    return median_or_inf(steps);
  }
  if (grid.metric == "final_vanilla_return") {
    std::vector<double> finals;
    for (const JobResult& j : jobs) {
      if (!j.diverged && j.error.empty()) finals.push_back(j.final_vanilla_return);
    }
    return finals.empty() ? -kInf : mean_of(finals);
  }
  // stabilization_energy
  std::vector<double> energies;
  for (const JobResult& j : jobs) {
    for (const SweepRow& row : j.sweep) energies.push_back(row.energy_unsigned);
  }
  return energies.empty() ? kInf : mean_of(energies);
}

}  // namespace

GridSearchResult grid_search(const ExperimentConfig& cfg,
                             const GridSearchSpec& grid,
                             const GridMetricFn& metric_fn) {
  const RewardVariant variant = shaped_variant_of(cfg);
  if (grid.metric == "convergence_step" && !cfg.convergence.threshold) {
    throw std::invalid_argument(
        "grid metric convergence_step needs convergence.threshold");
  }
  if (grid.metric == "stabilization_energy" &&
      (cfg.env_name != "cartpole" || cfg.sweep_angles_deg.empty())) {
    throw std::invalid_argument(
        "grid metric stabilization_energy needs a cartpole config with "
        "sweep_angles_deg");
  }
  const long long points = static_cast<long long>(grid.delta_a.size()) *
                           static_cast<long long>(grid.delta_b.size()) *
                           static_cast<long long>(grid.barrier_gain.size());
  const long long runs = points * static_cast<long long>(cfg.seeds.size());
  if (runs > cfg.grid_budget) {
    throw std::invalid_argument(
        "grid search refused: " + std::to_string(points) + " points x " +
        std::to_string(cfg.seeds.size()) + " seeds = " + std::to_string(runs) +
        " training runs exceeds grid_budget " + std::to_string(cfg.grid_budget));
  }

  const GridMetricFn metric = metric_fn ? metric_fn : default_grid_metric;
  const bool higher_better = grid.metric == "final_vanilla_return";

  std::vector<GridPointResult> table;
  for (double da : grid.delta_a) {
    for (double db : grid.delta_b) {
      for (double gain : grid.barrier_gain) {
        ExperimentConfig point_cfg = cfg;
        point_cfg.variants = {variant};
        point_cfg.barrier.delta_a = da;
        point_cfg.barrier.delta_b = db;
        point_cfg.barrier.barrier_gain = gain;
        GridPointResult row;
        row.delta_a = da;
        row.delta_b = db;
        row.barrier_gain = gain;
        row.metric_value = metric(point_cfg, grid);
        table.push_back(row);
      }
    }
  }

  std::stable_sort(table.begin(), table.end(),
                   [&](const GridPointResult& a, const GridPointResult& b) {
                     return higher_better ? a.metric_value > b.metric_value
                                          : a.metric_value < b.metric_value;
                   });

  GridSearchResult result;
  result.ranked = table;
  result.best_config = cfg;
  result.best_config.variants = {variant};
  result.best_config.barrier.delta_a = table.front().delta_a;
  result.best_config.barrier.delta_b = table.front().delta_b;
  result.best_config.barrier.barrier_gain = table.front().barrier_gain;

  fs::create_directories(cfg.output_dir);
  CsvWriter csv({"rank", "delta_a", "delta_b", "barrier_gain", "metric",
                 "metric_value"});
  for (std::size_t i = 0; i < table.size(); ++i) {
    csv.add_field(static_cast<long long>(i + 1));
    csv.add_field(table[i].delta_a);
    csv.add_field(table[i].delta_b);
    csv.add_field(table[i].barrier_gain);
    csv.add_field(grid.metric);
    csv.add_field(table[i].metric_value);
    csv.end_row();
  }
  result.table_csv_path = (fs::path(cfg.output_dir) / "grid.csv").string();
  csv.write_file(result.table_csv_path);

  result.best_config_path = (fs::path(cfg.output_dir) / "best_config.json").string();
  std::ofstream out(result.best_config_path);
  out << dump_config(result.best_config).dump(2) << '\n';
  return result;
}

LoadedPolicy load_policy(const std::string& checkpoint_path) {
  std::ifstream meta_in(checkpoint_path + ".meta.json");
  if (!meta_in) {
    throw std::invalid_argument("cannot open '" + checkpoint_path +
                                ".meta.json' (expected next to the checkpoint)");
  }
  json meta;
  try {
    meta_in >> meta;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("checkpoint meta parse error: ") +
                                e.what());
  }
  LoadedPolicy loaded;
  loaded.config = parse_config(meta.at("config"));
  loaded.variant = variant_from_string(meta.at("variant").get<std::string>());
  loaded.seed = meta.at("seed").get<std::uint64_t>();

  std::ifstream in(checkpoint_path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open checkpoint '" + checkpoint_path + "'");
  }
  loaded.agent = std::make_unique<Td3Agent>(env_descriptor(loaded.config),
                                            loaded.config.td3, loaded.seed);
  loaded.agent->load_networks(in);
  return loaded;
}

}  // namespace bfrl
