#pragma once

// Seeded Monte Carlo harnesses. Each trial draws from Philox streams keyed by
// (master_seed, global trial index, purpose), so the results are fixed by
// the config alone; trials run in a parallel map and are reduced serially.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparcs/linalg.hpp"
#include "sparcs/simgen.hpp"

namespace sparcs {

enum class ExperimentId { SelectionError, TwoStageRmse, ArSweep, Fwer, DiscoveryCounts };
enum class Method { SIS, PCS, PCS_B, LASSO, Oracle };

std::string_view to_string(ExperimentId id) noexcept;
std::string_view to_string(Method m) noexcept;
ExperimentId parse_experiment_id(std::string_view name);
Method parse_method(std::string_view name);

struct ExperimentConfig {
  ExperimentId id = ExperimentId::SelectionError;
  Index p = 1000;
  Index k = 10;
  Index l = 0;  // selected set size; 0 means k

  std::vector<Index> n_grid;
  std::vector<Index> t_grid;
  std::vector<Index> p_grid;
  std::vector<double> phi_grid;
  std::vector<double> sigma_grid;
  std::vector<double> rho_grid;
  std::vector<double> xi_grid;  // discovery counts: thresholds solving xi = target

  double sigma = 0.1;      // Bernoulli-Gaussian spread
  double noise_var = 0.05;
  std::string coefficient_law = "unit_normal";  // or "bernoulli_gaussian"

  std::string design = "block_sparse";  // block_sparse | identity | ar
  double phi = 0.0;                     // AR coefficient for design = ar
  Index block_size = 0;                 // 0: max(1, p / 100)
  double block_corr = 0.5;
  double decay_base = 0.5;
  double decay_scale = 0.1;

  Index n_stage1 = 0;  // ar_sweep
  Index t_total = 0;   // ar_sweep
  double stage1_log_factor = 25.0;
  Index test_size = 10000;

  int cv_folds = 2;
  int lambda_grid_size = 20;
  double lambda_min_ratio = 1e-3;

  Index trials = 100;
  std::uint64_t master_seed = 1;
  std::vector<Method> methods;
  std::string output_path;

  /// Experiment-specific defaults (methods, design, coefficient law).
  static ExperimentConfig defaults_for(ExperimentId id);
  /// Strict: unknown keys are a ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  Index selected_size() const noexcept { return l > 0 ? l : k; }
  /// Throws ConfigError.
  void validate() const;
};

struct TrialResult {
  Index trial_index = 0;  // global: grid point * trials + trial
  double grid1 = 0.0;
  double grid2 = 0.0;
  std::string method;
  std::string metric_name;
  double metric_value = 0.0;
  std::uint64_t seed_used = 0;  // stream base of the trial
};

struct AggregateRow {
  double grid1 = 0.0;
  double grid2 = 0.0;
  std::string method;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  Index count = 0;
};

struct ExperimentResult {
  ExperimentId id = ExperimentId::SelectionError;
  std::string grid1_name;
  std::string grid2_name;
  std::vector<TrialResult> trials;
  std::vector<AggregateRow> aggregate;
  double seconds = 0.0;
  int threads = 1;
};

struct RunOptions {
  int threads = 0;      // 0: OpenMP default
  bool serial = false;  // use the serial reference map
};

/// Runs body(i) for i in [0, count). The parallel version stores nothing
/// itself; bodies write to their own slot. Exceptions are rethrown after the
/// loop, lowest index first.
void map_trials_serial(Index count, const std::function<void(Index)>& body);
void map_trials(Index count, int threads, const std::function<void(Index)>& body);

ExperimentResult run_selection_error(const ExperimentConfig& cfg, const RunOptions& opts = {});
ExperimentResult run_two_stage_rmse(const ExperimentConfig& cfg, const RunOptions& opts = {});
ExperimentResult run_ar_sweep(const ExperimentConfig& cfg, const RunOptions& opts = {});
ExperimentResult run_fwer(const ExperimentConfig& cfg, const RunOptions& opts = {});
ExperimentResult run_discovery_counts(const ExperimentConfig& cfg, const RunOptions& opts = {});
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

std::string trials_csv(const ExperimentResult& r);
std::string aggregate_csv(const ExperimentResult& r);
nlohmann::json manifest(const ExperimentConfig& cfg, const ExperimentResult& r);

/// Finds an aggregate row; throws std::out_of_range when absent.
const AggregateRow& find_row(const ExperimentResult& r, double grid1, double grid2, const std::string& method,
                             const std::string& metric);

/// Draws only the listed columns of an n-row design sample, exactly in
/// distribution: Gaussian via the sub-covariance, AR via the Markov jumps
/// between listed positions.
Eigen::MatrixXd sample_design_columns(const CovarianceSpec* gaussian, double ar_phi, Index p,
                                      const std::vector<Index>& support, Index n, const std::vector<Index>& columns,
                                      RandomStream& rng);

}  // namespace sparcs
