#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imbench/mdp.hpp"
#include "imbench/trajectory.hpp"

namespace imbench {

enum class EstimateKind { mle, mimic_md, mb };

std::string to_string(EstimateKind kind);

/// Estimated expert state-action distribution. The MLE has per-step mass
/// exactly 1; the split estimators combine an exact-probability term (<= 1)
/// and an empirical-fraction term (<= 1), so per-step mass lies in [0, 2].
struct OccupancyEstimate {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> est;  // (h, s, a)
  EstimateKind kind = EstimateKind::mle;
  bool degenerate = false;  // set when built from no data (e.g. zero rollouts)

  double& at(int h, int s, int a) {
    return est[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double at(int h, int s, int a) const {
    return est[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }

  void validate() const;
};

/// Behavioral cloning output; `empty_dataset` flags the fully uniform
/// fallback produced from no data.
struct BcPolicy {
  Policy policy;
  bool empty_dataset = false;
};

/// Counting estimator of the expert policy: visit-count ratios on visited
/// (h, s), uniform elsewhere.
BcPolicy bc_fit(const TrajectoryDataset& dataset, int num_actions);

/// Equal split of an expert dataset plus the visited-state machinery the
/// transition-aware estimators need.
struct DatasetSplit {
  TrajectoryDataset d1;
  TrajectoryDataset d1_complement;
  /// visited[h][s]: state s seen at step h in d1.
  std::vector<std::vector<char>> visited;
  /// expert_action[h][s]: action taken at the visited (h, s), -1 if unseen.
  /// The deterministic-expert assumption makes this well defined; conflicting
  /// actions abort construction.
  std::vector<std::vector<int>> expert_action;

  bool in_visited(int h, int s) const { return visited[h][s] != 0; }
};

/// Uniformly random equal partition, deterministic in the seed. An odd
/// dataset drops one uniformly random trajectory before halving.
DatasetSplit split_dataset(const TrajectoryDataset& dataset, std::uint64_t seed);

/// Split with an explicit choice of D1 member indices (enumeration mode).
DatasetSplit split_with_indices(const TrajectoryDataset& dataset,
                                const std::vector<int>& d1_indices);

/// All size-(m/2) subsets of {0..m-1}, for exhaustive split enumeration.
std::vector<std::vector<int>> all_half_subsets(int m);

/// Transition-aware estimator: the exact-probability mass of trajectory
/// prefixes fully covered by D1 (forward dynamic programming through the
/// visited sets), plus the empirical fraction of D1-complement trajectories
/// whose prefix leaves the visited sets.
OccupancyEstimate mimic_md_estimate(const TabularMDP& mdp, const DatasetSplit& split);

/// Monte-Carlo variant for unknown transitions: the first term is replaced by
/// the fraction of BC-policy rollouts whose prefixes stay inside the visited
/// sets. Rollouts must take the expert action on D1-visited states.
OccupancyEstimate mb_estimate(const DatasetSplit& split, const TrajectoryDataset& rollouts);

/// Maximum likelihood estimate: empirical frequency of (s, a) at each step.
OccupancyEstimate mle_estimate(const TrajectoryDataset& dataset);

/// Empirical transition model fit by counting; zero-count rows fall back to
/// the uniform distribution so the model stays a valid MDP for planning.
struct EmpiricalModel {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> transition;       // (h, s, a, s') normalized counts
  std::vector<std::int64_t> count_sa;   // (h, s, a) visit totals
  std::vector<std::int64_t> count_sas;  // (h, s, a, s')
  bool degenerate = false;              // no data at all

  std::int64_t visits(int h, int s, int a) const {
    return count_sa[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  std::int64_t total_visits() const;

  /// View for the solvers; the caller supplies the (known) initial
  /// distribution.
  TransitionModel model(std::span<const double> initial) const {
    return TransitionModel{num_states, num_actions, horizon, transition, initial};
  }
};

EmpiricalModel fit_empirical_model(const TrajectoryDataset& interactions, int num_states,
                                   int num_actions, int horizon);

/// Diagnostic: sum over h of entrywise absolute differences.
double estimation_error_l1(const OccupancyEstimate& estimate, const OccupancyMeasure& truth);
double estimation_error_l1(std::span<const double> estimate, std::span<const double> truth);

}  // namespace imbench
