#include "imbench/mdp.hpp"

#include <cmath>
#include <stdexcept>

namespace imbench {

namespace detail {

void check_distribution(std::span<const double> row, double tol, const std::string& what) {
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] < 0.0) {
      throw std::invalid_argument(what + ": negative entry at index " + std::to_string(i));
    }
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > tol) {
    throw std::invalid_argument(what + ": mass " + std::to_string(sum) + " not 1");
  }
}

}  // namespace detail

Policy Policy::uniform(int num_states, int num_actions, int horizon) {
  Policy p{num_states, num_actions, horizon,
           std::vector<double>(static_cast<std::size_t>(horizon) * num_states * num_actions,
                               1.0 / num_actions),
           false};
  return p;
}

Policy Policy::constant(int num_states, int num_actions, int horizon, int action) {
  if (action < 0 || action >= num_actions) {
    throw std::invalid_argument("Policy::constant: action " + std::to_string(action) +
                                " out of range");
  }
  Policy p{num_states, num_actions, horizon,
           std::vector<double>(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0),
           true};
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < num_states; ++s) p.at(h, s, action) = 1.0;
  return p;
}

void Policy::validate() const {
  if (num_states <= 0 || num_actions <= 0 || horizon <= 0) {
    throw std::invalid_argument("Policy: non-positive dimensions");
  }
  if (action_prob.size() !=
      static_cast<std::size_t>(horizon) * num_states * num_actions) {
    throw std::invalid_argument("Policy: action_prob size mismatch");
  }
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      std::span<const double> row(&action_prob[(static_cast<std::size_t>(h) * num_states + s) *
                                               num_actions],
                                  static_cast<std::size_t>(num_actions));
      detail::check_distribution(row, kRowSumTol,
                                 "Policy row (h=" + std::to_string(h) +
                                     ", s=" + std::to_string(s) + ")");
      if (deterministic) {
        int ones = 0;
        for (double v : row) {
          if (v == 1.0) ++ones;
          else if (v != 0.0) throw std::invalid_argument("Policy: deterministic row not one-hot");
        }
        if (ones != 1) throw std::invalid_argument("Policy: deterministic row not one-hot");
      }
    }
  }
}

std::vector<double> OccupancyMeasure::state_marginal(int h) const {
  std::vector<double> m(static_cast<std::size_t>(num_states), 0.0);
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a) m[s] += at(h, s, a);
  return m;
}

void OccupancyMeasure::validate() const {
  if (dist.size() != static_cast<std::size_t>(horizon) * num_states * num_actions) {
    throw std::invalid_argument("OccupancyMeasure: size mismatch");
  }
  for (int h = 0; h < horizon; ++h) {
    double mass = 0.0;
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        const double v = at(h, s, a);
        if (v < 0.0) {
          throw std::invalid_argument("OccupancyMeasure: negative entry at (h=" +
                                      std::to_string(h) + ", s=" + std::to_string(s) +
                                      ", a=" + std::to_string(a) + ")");
        }
        mass += v;
      }
    }
    if (std::abs(mass - 1.0) > kMassTol) {
      throw std::invalid_argument("OccupancyMeasure: step " + std::to_string(h) + " mass " +
                                  std::to_string(mass) + " not 1");
    }
  }
}

void TabularMDP::validate() const {
  if (num_states <= 0 || num_actions <= 0 || horizon <= 0) {
    throw std::invalid_argument("TabularMDP: non-positive dimensions");
  }
  const std::size_t n_sa = static_cast<std::size_t>(horizon) * num_states * num_actions;
  if (transition.size() != n_sa * num_states || reward.size() != n_sa ||
      initial.size() != static_cast<std::size_t>(num_states)) {
    throw std::invalid_argument("TabularMDP: array size mismatch");
  }
  detail::check_distribution(initial, kRowSumTol, "TabularMDP initial distribution");
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        detail::check_distribution(model().row(h, s, a), kRowSumTol,
                                   "TabularMDP transition row (h=" + std::to_string(h) +
                                       ", s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                                       ")");
        const double r = reward_at(h, s, a);
        if (r < 0.0 || r > 1.0) {
          throw std::invalid_argument("TabularMDP: reward out of [0,1] at (h=" +
                                      std::to_string(h) + ", s=" + std::to_string(s) +
                                      ", a=" + std::to_string(a) + ")");
        }
      }
    }
  }
}

namespace {

void check_dims(const TransitionModel& model, const Policy& policy) {
  if (model.num_states != policy.num_states || model.num_actions != policy.num_actions ||
      model.horizon != policy.horizon) {
    throw std::invalid_argument(
        "dimension mismatch: model (S=" + std::to_string(model.num_states) +
        ", A=" + std::to_string(model.num_actions) + ", H=" + std::to_string(model.horizon) +
        ") vs policy (S=" + std::to_string(policy.num_states) +
        ", A=" + std::to_string(policy.num_actions) + ", H=" + std::to_string(policy.horizon) +
        ")");
  }
}

}  // namespace

OccupancyMeasure occupancy(const TransitionModel& model, const Policy& policy) {
  check_dims(model, policy);
  const int S = model.num_states, A = model.num_actions, H = model.horizon;
  OccupancyMeasure occ{S, A, H,
                       std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0)};
  std::vector<double> state(model.initial.begin(), model.initial.end());
  std::vector<double> next(static_cast<std::size_t>(S), 0.0);
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      const double ps = state[s];
      if (ps == 0.0) continue;
      for (int a = 0; a < A; ++a) occ.at(h, s, a) = ps * policy.at(h, s, a);
    }
    if (h + 1 == H) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double mass = occ.at(h, s, a);
        if (mass == 0.0) continue;
        const auto row = model.row(h, s, a);
        for (int sn = 0; sn < S; ++sn) next[sn] += mass * row[sn];
      }
    }
    state.swap(next);
  }
  return occ;
}

OccupancyMeasure occupancy(const TabularMDP& mdp, const Policy& policy) {
  return occupancy(mdp.model(), policy);
}

double policy_value(const TransitionModel& model, const Policy& policy,
                    std::span<const double> reward) {
  const std::size_t n_sa =
      static_cast<std::size_t>(model.horizon) * model.num_states * model.num_actions;
  if (reward.size() != n_sa) {
    throw std::invalid_argument("policy_value: reward size mismatch");
  }
  const OccupancyMeasure occ = occupancy(model, policy);
  double value = 0.0;
  for (std::size_t i = 0; i < n_sa; ++i) value += occ.dist[i] * reward[i];
  return value;
}

double policy_value(const TabularMDP& mdp, const Policy& policy,
                    std::optional<std::span<const double>> reward_override) {
  if (reward_override) {
    for (std::size_t i = 0; i < reward_override->size(); ++i) {
      const double r = (*reward_override)[i];
      if (r < -1.0 || r > 1.0) {
        throw std::invalid_argument("policy_value: override reward out of [-1,1] at index " +
                                    std::to_string(i));
      }
    }
    return policy_value(mdp.model(), policy, *reward_override);
  }
  return policy_value(mdp.model(), policy, mdp.reward);
}

Policy policy_from_occupancy(const OccupancyMeasure& occ) {
  const int S = occ.num_states, A = occ.num_actions, H = occ.horizon;
  Policy policy{S, A, H,
                std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0), false};
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      double mass = 0.0;
      for (int a = 0; a < A; ++a) mass += occ.at(h, s, a);
      if (mass > 0.0) {
        for (int a = 0; a < A; ++a) policy.at(h, s, a) = occ.at(h, s, a) / mass;
      } else {
        // Matches the BC convention on non-visited states; never affects value.
        for (int a = 0; a < A; ++a) policy.at(h, s, a) = 1.0 / A;
      }
    }
  }
  return policy;
}

}  // namespace imbench
