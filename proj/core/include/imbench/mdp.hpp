#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imbench {

inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kMassTol = 1e-10;

/// Non-stationary stochastic policy: one row-stochastic action table per step.
/// action_prob is indexed (h, s, a), flattened as ((h * S + s) * A + a).
struct Policy {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> action_prob;
  bool deterministic = false;

  double& at(int h, int s, int a) {
    return action_prob[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double at(int h, int s, int a) const {
    return action_prob[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }

  /// Uniform policy over all actions at every (h, s).
  static Policy uniform(int num_states, int num_actions, int horizon);
  /// Deterministic policy taking `action` everywhere.
  static Policy constant(int num_states, int num_actions, int horizon, int action);

  void validate() const;
};

/// Per-step state-action visitation distributions of a policy.
struct OccupancyMeasure {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> dist;  // (h, s, a)

  double& at(int h, int s, int a) {
    return dist[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double at(int h, int s, int a) const {
    return dist[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }

  /// State marginal at step h.
  std::vector<double> state_marginal(int h) const;

  void validate() const;
};

/// Transition dynamics plus the initial distribution, without rewards. Both
/// the exact environment and a learned empirical model expose this view; the
/// spans alias storage owned by the caller.
struct TransitionModel {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::span<const double> transition;  // (h, s, a, s')
  std::span<const double> initial;     // rho

  std::span<const double> row(int h, int s, int a) const {
    const std::size_t base =
        ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
        static_cast<std::size_t>(num_states);
    return transition.subspan(base, num_states);
  }
};

/// Exact tabular episodic MDP: (S, A, P, r, H, rho).
struct TabularMDP {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> transition;  // (h, s, a, s'), each row a distribution
  std::vector<double> reward;      // (h, s, a) in [0, 1]
  std::vector<double> initial;     // rho over states

  double transition_at(int h, int s, int a, int next) const {
    return transition[((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
                          num_states +
                      next];
  }
  double& transition_at(int h, int s, int a, int next) {
    return transition[((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
                          num_states +
                      next];
  }
  double reward_at(int h, int s, int a) const {
    return reward[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double& reward_at(int h, int s, int a) {
    return reward[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }

  TransitionModel model() const {
    return TransitionModel{num_states, num_actions, horizon, transition, initial};
  }

  /// Checks row stochasticity, the initial distribution, and reward bounds.
  /// The step-H kernel is validated like the others even though a length-H
  /// rollout never consumes it.
  void validate() const;
};

/// Exact per-step visitation distribution of `policy` via the forward flow
/// recursion; d_1(s, a) = rho(s) pi_1(a | s).
OccupancyMeasure occupancy(const TransitionModel& model, const Policy& policy);
OccupancyMeasure occupancy(const TabularMDP& mdp, const Policy& policy);

/// Expected return: sum_h sum_{s,a} d_h(s, a) r_h(s, a). When
/// `reward_override` is given its entries may lie in [-1, 1] (adversarial
/// rewards); otherwise the MDP reward is used.
double policy_value(const TabularMDP& mdp, const Policy& policy,
                    std::optional<std::span<const double>> reward_override = std::nullopt);
double policy_value(const TransitionModel& model, const Policy& policy,
                    std::span<const double> reward);

/// Recovers a policy from a realizable occupancy: pi_h(a|s) proportional to
/// d_h(s, a), uniform on states with zero marginal mass.
Policy policy_from_occupancy(const OccupancyMeasure& occ);

namespace detail {
void check_distribution(std::span<const double> row, double tol, const std::string& what);
}

}  // namespace imbench
