#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "imbench/envs.hpp"
#include "imbench/solvers.hpp"

namespace imbench {

enum class Algorithm { bc, vail, tail, mimic_md_exact, fem, gtal, gail, oal, mb_tail };

std::string to_string(Algorithm alg);
Algorithm algorithm_from_string(const std::string& name);

enum class SweepAxis { horizon, expert_m, interactions };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

/// One experiment: an environment family, an algorithm, and a sweep over
/// horizon, expert sample size, or interaction budget, repeated over seeds.
struct ExperimentConfig {
  EnvironmentSpec env;
  Algorithm algorithm = Algorithm::bc;
  SweepAxis sweep = SweepAxis::expert_m;
  std::vector<long long> values;

  long long expert_m = 100;      // fixed m when not sweeping expert_m
  int iterations = 0;            // solver iterations; 0 picks the family default
  StepRule step_rule = StepRule::adaptive;
  OptimumSelection selection = OptimumSelection::worst;
  double gail_eta = 1.0;
  long long estimator_rollouts = 5000;    // n' (mb_tail)
  long long exploration_episodes = 5000;  // n (mb_tail)
  long long online_episodes = 10000;      // K (oal)
  double delta = 0.1;

  int seeds = 1;
  std::uint64_t base_seed = 0;
  std::string out_path;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig parse_experiment_config_file(const std::string& path);

/// Default solver iteration budgets per environment family and sweep axis;
/// horizon-dependent where the protocol scales them with H.
int default_iterations(EnvFamily family, SweepAxis axis, Algorithm alg, int horizon);

/// One sweep cell result. The gap is evaluated exactly via occupancy under
/// the TRUE model even when the algorithm planned on an empirical one.
struct ResultRow {
  std::string env;
  std::string alg;
  std::string sweep_param;
  long long sweep_value = 0;
  int seed = 0;
  long long m = 0;
  long long n = 0;  // interaction episodes consumed (0 for known-transition runs)
  double gap = 0.0;
  double expert_value = 0.0;
  double runtime_ms = 0.0;
  std::optional<std::string> error;
};

/// Runs every (sweep value, seed) cell; rows come back in deterministic
/// (value-major, seed-minor) order regardless of execution parallelism.
/// Per-cell failures become error rows and never abort the sweep.
std::vector<ResultRow> run_sweep(const ExperimentConfig& config);

/// Least-squares slope of the best-fit line in log-log space. Nonpositive
/// gaps are dropped with a warning; fewer than 2 remaining points is an
/// error.
double loglog_slope(const std::vector<std::pair<double, double>>& points);

struct AggregateRow {
  std::string alg;
  long long sweep_value = 0;
  double mean = 0.0;
  double stddev = 0.0;       // over seeds (n-1 denominator)
  double stddev_of_mean = 0.0;
  int count = 0;
};

struct SlopeRow {
  std::string alg;
  double slope = 0.0;  // NaN when undefined
};

struct ReportSummary {
  std::vector<AggregateRow> aggregates;
  std::vector<SlopeRow> slopes;
};

/// Writes the result CSV (header, data rows, aggregate block, slope lines).
/// Byte-stable for identical inputs; wall-clock runtimes stay out of the
/// file so re-runs with identical config and seeds are byte-identical.
ReportSummary emit_report(const std::vector<ResultRow>& rows, const std::string& out_path);
ReportSummary emit_report(const std::vector<ResultRow>& rows, std::ostream& out);

}  // namespace imbench
