#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "bfrl/config.hpp"
#include "bfrl/csv.hpp"
#include "bfrl/experiment.hpp"
#include "bfrl/metrics.hpp"
#include "bfrl/seeding.hpp"
#include "bfrl/td3.hpp"

namespace {

using namespace bfrl;

void apply_overrides(ExperimentConfig& cfg, const std::string& out_dir,
                     const std::string& variant,
                     const std::vector<std::uint64_t>& seeds) {
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (!variant.empty()) cfg.variants = {variant_from_string(variant)};
  if (!seeds.empty()) cfg.seeds = seeds;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::string& variant, const std::vector<std::uint64_t>& seeds) {
  ExperimentConfig cfg = load_config(config_path);
  apply_overrides(cfg, out_dir, variant, seeds);
  const ExperimentResult result = run_experiment(cfg);
  std::cout << "wrote " << result.curve_csv_path << '\n';
  if (!result.sweep_csv_path.empty()) {
    std::cout << "wrote " << result.sweep_csv_path << '\n';
  }
  std::cout << "wrote " << result.summary_json_path << '\n';
  for (const JobResult& job : result.jobs) {
    if (!job.error.empty()) {
      std::cout << "failed seed " << job.seed << " (" << to_string(job.variant)
                << "): " << job.error << '\n';
    }
  }
  return 0;
}

int cmd_grid(const std::string& config_path, const std::string& grid_path,
             const std::string& out_dir) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const GridSearchSpec grid = load_grid(grid_path);
  const GridSearchResult result = grid_search(cfg, grid);
  std::cout << "wrote " << result.table_csv_path << '\n';
  std::cout << "wrote " << result.best_config_path << '\n';
  const GridPointResult& best = result.ranked.front();
  std::cout << "best: delta_a=" << format_double(best.delta_a)
            << " delta_b=" << format_double(best.delta_b)
            << " barrier_gain=" << format_double(best.barrier_gain)
            << " (" << grid.metric << " = " << format_double(best.metric_value)
            << ")\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, int episodes, std::uint64_t seed) {
  LoadedPolicy loaded = load_policy(checkpoint);
  std::unique_ptr<Env> env = make_configured_env(loaded.config, loaded.variant);
  const EvalResult result = evaluate(*loaded.agent, *env, episodes, seed);
  double energy_signed = 0.0, energy_unsigned = 0.0;
  for (const RunRecord& rec : result.episodes) {
    energy_signed += episode_energy(rec, true);
    energy_unsigned += episode_energy(rec, false);
  }
  const double n = static_cast<double>(result.episodes.size());
  std::cout << "episodes:              " << episodes << '\n'
            << "mean vanilla return:   " << format_double(result.mean_vanilla_return) << '\n'
            << "mean shaped return:    " << format_double(result.mean_shaped_return) << '\n'
            << "mean energy (signed):  " << format_double(energy_signed / n) << '\n'
            << "mean energy (unsigned):" << format_double(energy_unsigned / n) << '\n';
  return 0;
}

int cmd_sweep(const std::string& checkpoint, std::vector<double> angles_deg,
              const std::string& out_path, std::uint64_t seed) {
  LoadedPolicy loaded = load_policy(checkpoint);
  if (loaded.config.env_name != "cartpole") {
    throw std::invalid_argument("sweep-angles needs a cartpole checkpoint");
  }
  if (angles_deg.empty()) angles_deg = loaded.config.sweep_angles_deg;
  if (angles_deg.empty()) {
    throw std::invalid_argument(
        "no angles: pass --angles or set sweep_angles_deg in the config");
  }
  std::vector<double> angles_rad;
  for (double deg : angles_deg) {
    angles_rad.push_back(deg * std::numbers::pi / 180.0);
  }
  Td3Agent& agent = *loaded.agent;
  const DeterministicPolicy policy = [&agent](const std::vector<double>& s) {
    return agent.select_action(s, false);
  };
  const std::vector<SweepRow> rows = stabilization_energy_sweep(
      policy, loaded.config.cartpole, angles_rad, loaded.config.stabilization,
      seed);

  CsvWriter csv({"variant", "seed", "init_angle_rad", "stabilized", "steps",
                 "energy_signed", "energy_unsigned"});
  for (const SweepRow& row : rows) {
    csv.add_field(to_string(loaded.variant));
    csv.add_field(loaded.seed);
    csv.add_field(row.init_angle);
    csv.add_field(row.stabilized);
    csv.add_field(static_cast<long long>(row.steps));
    csv.add_field(row.energy_signed);
    csv.add_field(row.energy_unsigned);
    csv.end_row();
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    csv.write_file(out_path);
    std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barrier-shaped reward experiments on continuous-control tasks"};
  app.require_subcommand(1);

  std::string config_path, grid_path, checkpoint, out_dir, variant, out_file;
  std::vector<std::uint64_t> seeds;
  std::vector<double> angles_deg;
  int episodes = 10;
  std::uint64_t eval_seed = 0;

  CLI::App* run = app.add_subcommand("run", "Train and evaluate an experiment config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "override output directory");
  run->add_option("--variant", variant, "run a single reward variant");
  run->add_option("--seed", seeds, "override the seed list");

  CLI::App* grid = app.add_subcommand("grid", "Grid search over barrier parameters");
  grid->add_option("config", config_path, "experiment config (JSON)")->required();
  grid->add_option("gridfile", grid_path, "grid spec (JSON)")->required();
  grid->add_option("--out", out_dir, "override output directory");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved checkpoint");
  eval->add_option("checkpoint", checkpoint, "checkpoint .bin written by run")->required();
  eval->add_option("--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "evaluation seed");

  CLI::App* sweep = app.add_subcommand("sweep-angles",
                                       "Stabilization-energy sweep for a checkpoint");
  sweep->add_option("checkpoint", checkpoint, "checkpoint .bin written by run")->required();
  sweep->add_option("--angles", angles_deg, "initial pole angles in degrees");
  sweep->add_option("--out", out_file, "write CSV here instead of stdout");
  sweep->add_option("--seed", eval_seed, "rollout seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, variant, seeds);
    if (grid->parsed()) return cmd_grid(config_path, grid_path, out_dir);
    if (eval->parsed()) return cmd_eval(checkpoint, episodes, eval_seed);
    if (sweep->parsed()) return cmd_sweep(checkpoint, angles_deg, out_file, eval_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
