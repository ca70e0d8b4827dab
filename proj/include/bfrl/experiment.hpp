#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bfrl/config.hpp"
#include "bfrl/metrics.hpp"
#include "bfrl/td3.hpp"

namespace bfrl {

struct JobResult {
  RewardVariant variant = RewardVariant::Vanilla;
  std::uint64_t seed = 0;
  std::vector<EvalPoint> curve;
  std::vector<SweepRow> sweep;
  std::optional<double> convergence_step;  // in training steps
  double final_vanilla_return = 0.0;
  bool diverged = false;
  bool audit_ok = true;
  std::string error;  // non-empty when the job failed outright
  std::string checkpoint_path;
};

struct ExperimentResult {
  std::vector<JobResult> jobs;      // config order: variant-major, seed-minor
  nlohmann::json summary;
  std::string curve_csv_path;
  std::string sweep_csv_path;       // empty when no sweep ran
  std::string summary_json_path;
};

// Trains every variant x seed job, writes curve.csv (and sweep.csv for
// cart-pole configs with sweep angles), checkpoints with sidecar meta files,
// and summary.json. Failed seeds are flagged in the summary and skipped in
// aggregates; the run itself keeps going.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Per-point metric for grid search, lower-is-better orientation applied by
// the caller. Injectable for tests; the default trains for real.
using GridMetricFn =
    std::function<double(const ExperimentConfig&, const GridSearchSpec&)>;

struct GridPointResult {
  double delta_a = 0.0;
  double delta_b = 0.0;
  double barrier_gain = 0.0;
  double metric_value = 0.0;
};

struct GridSearchResult {
  std::vector<GridPointResult> ranked;  // best first
  ExperimentConfig best_config;
  std::string table_csv_path;
  std::string best_config_path;
};

// Full factorial over the grid lists; refuses with a budget estimate when
// points x seeds exceeds config.grid_budget.
GridSearchResult grid_search(const ExperimentConfig& config,
                             const GridSearchSpec& grid,
                             const GridMetricFn& metric_fn = {});

// Loads the checkpoint + sidecar meta pair written by run_experiment.
struct LoadedPolicy {
  ExperimentConfig config;
  RewardVariant variant = RewardVariant::Vanilla;
  std::uint64_t seed = 0;
  std::unique_ptr<Td3Agent> agent;
};
LoadedPolicy load_policy(const std::string& checkpoint_path);

}  // namespace bfrl
