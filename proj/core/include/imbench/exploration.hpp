#pragma once

#include <cstdint>
#include <utility>

#include "imbench/estimators.hpp"
#include "imbench/mdp.hpp"
#include "imbench/solvers.hpp"
#include "imbench/trajectory.hpp"

namespace imbench {

/// Reward-free exploration budget and bonus parameters.
struct ExplorationConfig {
  long long episodes = 0;
  double delta = 0.1;
  /// Bonus scale; <= 0 selects the default ln(S A H n / delta).
  double bonus_scale = 0.0;
  std::uint64_t seed = 0;
};

/// Interaction budgets of the unknown-transition pipeline.
struct InteractionBudget {
  long long expert_m = 0;
  long long estimator_rollouts = 0;   // n'
  long long exploration_episodes = 0; // n
  long long online_episodes = 0;      // K (OAL)
};

/// Bonus-greedy reward-free explorer. Each episode plans greedily (value
/// iteration) against the pure exploration bonus
/// b_h(s, a) = min(1, sqrt(beta / (n_h(s, a) v 1))) under the current
/// empirical model, executes the greedy policy, and updates counts. The
/// returned model supports uniform policy evaluation: for any reward in
/// [0, 1] and any policy, |V under the true transitions - V under the model|
/// shrinks as the episode budget grows.
std::pair<TrajectoryDataset, EmpiricalModel> rf_explore(const Environment& env,
                                                        const ExplorationConfig& config);

/// Mirror-descent step-size schedule for the online solver; scale / sqrt(k)
/// at episode k.
struct OalStepSizes {
  double reward_scale = 1.0;
  double policy_scale = 1.0;
};

/// Online apprenticeship learning: per episode, update the empirical model
/// from the rollout, mirror-descent the reward on the L1 dual, mirror-descent
/// the policy against the bonus-augmented action values, and output the
/// policy realizing the mean occupancy of the episode policies.
Policy oal_solve(const Environment& env, const TrajectoryDataset& expert_data, long long episodes,
                 double delta, const OalStepSizes& steps, std::uint64_t seed);

/// Full unknown-transition pipeline: split the demonstrations, fit BC on one
/// half, roll it out for the Monte-Carlo estimator, learn a transition model
/// by reward-free exploration, then run the saddle-point solver on the
/// learned model.
Policy mb_tail(const Environment& env, const TrajectoryDataset& expert_data,
               const InteractionBudget& budget, const SaddleConfig& saddle,
               std::uint64_t seed, double delta = 0.1);

}  // namespace imbench
