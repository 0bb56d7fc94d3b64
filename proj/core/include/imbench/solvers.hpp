#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imbench/envs.hpp"
#include "imbench/estimators.hpp"
#include "imbench/mdp.hpp"

namespace imbench {

/// Adversarial reward, the dual variable of the L1 matching game; every
/// projection keeps ||w||_inf <= 1.
struct RewardWeights {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> w;  // (h, s, a)

  static RewardWeights zeros(int num_states, int num_actions, int horizon);

  /// Euclidean projection onto {||w||_inf <= 1}: elementwise clamp.
  void project();
};

enum class StepRule { fixed, adaptive };

struct SaddleConfig {
  int iterations = 1000;
  StepRule step_rule = StepRule::fixed;
  /// Inner-solver tolerance; exact value iteration gives 0. Kept as a knob
  /// for experiments with approximate inner solvers.
  double epsilon_opt = 0.0;
  /// Initial reward; empty means all-zero.
  std::vector<double> initial_w;
};

/// Per-iteration diagnostics of a game solver run.
struct SolveReport {
  std::vector<double> l1_objective;  // sum_h ||P^{pi_t}_h - est_h||_1
  std::vector<double> objective;     // solver-native objective per iteration
  std::vector<double> grad_norm;
  std::vector<double> step_size;
  double achieved_l1 = 0.0;  // final policy's L1 objective under the model
};

/// CSV columns: iteration, l1_objective, grad_norm, step_size.
void write_csv(const SolveReport& report, std::ostream& out);
void write_csv(const SolveReport& report, const std::string& path);

/// Finite-horizon value iteration. Rewards may lie in [-1, 1]; ties break
/// toward the lowest action index. Returns the greedy policy and its exact
/// value from the initial distribution.
std::pair<Policy, double> value_iteration(const TransitionModel& model,
                                          std::span<const double> reward);

/// Q^pi by backward recursion: Q_H = r_H, Q_h = r_h + P_h (pi-average of
/// Q_{h+1}).
std::vector<double> action_value(const TransitionModel& model, const Policy& policy,
                                 std::span<const double> reward);

/// Worst-case regret slack of the averaged saddle-point iterate after T
/// rounds: 2H sqrt(2SA/T) for the fixed step, 4H sqrt(2SA/T) for the
/// adaptive one.
double saddle_slack(const TransitionModel& model, const SaddleConfig& config);

/// Online-gradient-descent saddle solver for min_pi sum_h ||P^pi_h - est_h||_1.
/// Each iteration solves the inner optimal policy exactly by value iteration,
/// descends the reward, and the output policy realizes the mean state-action
/// distribution. Serves VAIL (MLE estimate, true model), TAIL (split
/// estimate, true model), and the MB-TAIL planning stage (empirical model).
std::pair<Policy, SolveReport> ogd_saddle_solve(const TransitionModel& model,
                                                const OccupancyEstimate& estimate,
                                                const SaddleConfig& config);

enum class OptimumSelection { worst, best, uniform };

/// Closed-form globally optimal matching policy on a Standard Imitation
/// instance: pi_h(a1|s) may lie anywhere in [est_h(s)/rho(s), 1] on states
/// where the estimated marginal undershoots rho; `worst` takes the lower
/// endpoint (largest policy value gap), `best` the upper, `uniform` a
/// seeded uniform draw from the interval.
Policy vail_closed_form_standard_imitation(const Environment& env,
                                           const OccupancyEstimate& estimate,
                                           OptimumSelection selection,
                                           std::uint64_t seed = 0);

/// Frank-Wolfe on 0.5 sum_h ||P^pi_h - est_h||_2^2 over the occupancy
/// polytope, with exact line search; the linear minimization runs value
/// iteration on the residual direction rescaled to ||.||_inf <= 1.
std::pair<Policy, SolveReport> fem_solve(const TransitionModel& model,
                                         const OccupancyEstimate& estimate, int iterations);

/// Multiplicative weights over the 2 H S A signed coordinates of the l_inf
/// dual, learning rate sqrt(8 ln(2HSA)/T), best response by value iteration.
std::pair<Policy, SolveReport> gtal_solve(const TransitionModel& model,
                                          const OccupancyEstimate& estimate, int iterations);

/// Closed-form GAIL discriminator; defined as 1/2 when both occupancies
/// vanish.
double gail_discriminator(double learner_mass, double expert_mass);

/// GAIL variant: closed-form discriminator D* = P^pi/(P^pi + est) (1/2 where
/// both vanish), reward -log D*, mirror-descent policy update
/// pi <- pi exp(eta Q).
std::pair<Policy, SolveReport> gail_solve(const TransitionModel& model,
                                          const OccupancyEstimate& estimate, int iterations,
                                          double eta);

/// Adaptive step size eta_t = D / sqrt(sum_i ||grad_i||^2); all-zero history
/// yields D.
double adaptive_step(std::span<const double> grad_norm_history, double diameter);

/// Diameter constant D = sqrt(2 H S A) used by the adaptive rule.
double adaptive_diameter(int num_states, int num_actions, int horizon);

/// sum_h ||occ_h - est_h||_1.
double l1_objective(std::span<const double> occ, std::span<const double> est);

}  // namespace imbench
