#include "imbench/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "imbench/rng.hpp"

namespace imbench {

namespace {

double default_bonus_scale(int S, int A, int H, long long episodes, double delta) {
  const double arg =
      static_cast<double>(S) * A * H * std::max<long long>(episodes, 1) / delta;
  return std::log(arg);
}

/// Incrementally maintained empirical model: counts plus normalized rows,
/// uniform fallback on zero-count rows.
struct OnlineModel {
  EmpiricalModel model;

  OnlineModel(int S, int A, int H) {
    model.num_states = S;
    model.num_actions = A;
    model.horizon = H;
    const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;
    model.count_sa.assign(n_sa, 0);
    model.count_sas.assign(n_sa * S, 0);
    model.transition.assign(n_sa * S, 1.0 / S);
    model.degenerate = true;
  }

  void record(const Trajectory& tr) {
    const int S = model.num_states, A = model.num_actions, H = model.horizon;
    model.degenerate = false;
    for (int h = 0; h < H; ++h) {
      const auto [s, a] = tr[h];
      const std::size_t sa = (static_cast<std::size_t>(h) * S + s) * A + a;
      model.count_sa[sa] += 1;
      if (h + 1 < H) {
        model.count_sas[sa * static_cast<std::size_t>(S) + tr[h + 1].first] += 1;
        renormalize(sa);
      }
    }
  }

  void renormalize(std::size_t sa) {
    const int S = model.num_states;
    std::int64_t total = 0;
    for (int sn = 0; sn < S; ++sn) total += model.count_sas[sa * S + sn];
    if (total == 0) return;
    for (int sn = 0; sn < S; ++sn) {
      model.transition[sa * S + sn] =
          static_cast<double>(model.count_sas[sa * S + sn]) / static_cast<double>(total);
    }
  }
};

Trajectory rollout_episode(const TabularMDP& mdp, const Policy& policy, Rng& rng) {
  const int A = mdp.num_actions, H = mdp.horizon;
  Trajectory tr;
  tr.reserve(H);
  int s = rng.categorical(mdp.initial);
  for (int h = 0; h < H; ++h) {
    std::span<const double> row(
        &policy.action_prob[(static_cast<std::size_t>(h) * mdp.num_states + s) * A],
        static_cast<std::size_t>(A));
    const int a = rng.categorical(row);
    tr.emplace_back(s, a);
    if (h + 1 < H) s = rng.categorical(mdp.model().row(h, s, a));
  }
  return tr;
}

}  // namespace

std::pair<TrajectoryDataset, EmpiricalModel> rf_explore(const Environment& env,
                                                        const ExplorationConfig& config) {
  if (config.episodes < 0) throw std::invalid_argument("rf_explore: negative episode budget");
  if (config.delta <= 0.0 || config.delta >= 1.0) {
    throw std::invalid_argument("rf_explore: delta must lie in (0, 1)");
  }
  const int S = env.mdp.num_states, A = env.mdp.num_actions, H = env.mdp.horizon;
  const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;
  OnlineModel online(S, A, H);
  TrajectoryDataset data{S, A, H, {}};
  data.trajectories.reserve(static_cast<std::size_t>(config.episodes));
  const double beta = config.bonus_scale > 0.0
                          ? config.bonus_scale
                          : default_bonus_scale(S, A, H, config.episodes, config.delta);
  Rng rng(config.seed);
  std::vector<double> bonus(n_sa, 0.0);
  for (long long episode = 0; episode < config.episodes; ++episode) {
    for (std::size_t sa = 0; sa < n_sa; ++sa) {
      const double visits = static_cast<double>(std::max<std::int64_t>(online.model.count_sa[sa], 1));
      bonus[sa] = std::min(1.0, std::sqrt(beta / visits));
    }
    auto [greedy, value] = value_iteration(online.model.model(env.mdp.initial), bonus);
    (void)value;
    Trajectory tr = rollout_episode(env.mdp, greedy, rng);
    online.record(tr);
    data.trajectories.push_back(std::move(tr));
  }
  return {std::move(data), std::move(online.model)};
}

Policy oal_solve(const Environment& env, const TrajectoryDataset& expert_data,
                 long long episodes, double delta, const OalStepSizes& steps,
                 std::uint64_t seed) {
  const int S = env.mdp.num_states, A = env.mdp.num_actions, H = env.mdp.horizon;
  if (episodes < 0) throw std::invalid_argument("oal_solve: negative episode budget");
  if (episodes == 0) return Policy::uniform(S, A, H);
  if (expert_data.empty()) throw std::invalid_argument("oal_solve: empty expert dataset");
  if (expert_data.num_states != S || expert_data.num_actions != A ||
      expert_data.horizon != H) {
    throw std::invalid_argument("oal_solve: expert dataset dimensions do not match the "
                                "environment");
  }
  const OccupancyEstimate expert_est = mle_estimate(expert_data);
  const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;

  OnlineModel online(S, A, H);
  Rng rng(seed);
  Policy pi = Policy::uniform(S, A, H);
  std::vector<double> w(n_sa, 0.0);
  std::vector<double> reward(n_sa, 0.0);
  std::vector<double> mean_occ(n_sa, 0.0);
  const double beta = default_bonus_scale(S, A, H, episodes, delta);
  for (long long k = 1; k <= episodes; ++k) {
    Trajectory tr = rollout_episode(env.mdp, pi, rng);
    online.record(tr);
    const TransitionModel model = online.model.model(env.mdp.initial);
    const OccupancyMeasure occ = occupancy(model, pi);
    for (std::size_t i = 0; i < n_sa; ++i) mean_occ[i] += occ.dist[i];

    const double eta_w = steps.reward_scale / std::sqrt(static_cast<double>(k));
    for (std::size_t i = 0; i < n_sa; ++i) {
      w[i] = std::clamp(w[i] + eta_w * (expert_est.est[i] - occ.dist[i]), -1.0, 1.0);
    }
    for (std::size_t i = 0; i < n_sa; ++i) {
      const double visits =
          static_cast<double>(std::max<std::int64_t>(online.model.count_sa[i], 1));
      reward[i] = w[i] + std::sqrt(beta / visits);
    }
    const std::vector<double> q = action_value(model, pi, reward);
    const double eta_pi = steps.policy_scale / std::sqrt(static_cast<double>(k));
    for (int h = 0; h < H; ++h) {
      for (int s = 0; s < S; ++s) {
        double qmax = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < A; ++a) {
          qmax = std::max(qmax, q[(static_cast<std::size_t>(h) * S + s) * A + a]);
        }
        double total = 0.0;
        for (int a = 0; a < A; ++a) {
          const double next =
              pi.at(h, s, a) *
              std::exp(eta_pi * (q[(static_cast<std::size_t>(h) * S + s) * A + a] - qmax));
          pi.at(h, s, a) = next;
          total += next;
        }
        for (int a = 0; a < A; ++a) pi.at(h, s, a) /= total;
      }
    }
  }
  for (double& v : mean_occ) v /= static_cast<double>(episodes);
  OccupancyMeasure mean{S, A, H, std::move(mean_occ)};
  return policy_from_occupancy(mean);
}

Policy mb_tail(const Environment& env, const TrajectoryDataset& expert_data,
               const InteractionBudget& budget, const SaddleConfig& saddle, std::uint64_t seed,
               double delta) {
  if (expert_data.size() < 2) {
    throw std::invalid_argument("mb_tail[split]: need at least 2 expert trajectories, have " +
                                std::to_string(expert_data.size()));
  }
  auto staged = [](const char* stage, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("mb_tail[") + stage + "]: " + e.what());
    }
  };
  const DatasetSplit split =
      staged("split", [&] { return split_dataset(expert_data, derive_seed(seed, 0)); });
  const BcPolicy bc =
      staged("bc_fit", [&] { return bc_fit(split.d1, env.mdp.num_actions); });
  const TrajectoryDataset rollouts = staged("rollout", [&] {
    return sample_trajectories(env.mdp, bc.policy,
                               static_cast<std::size_t>(budget.estimator_rollouts),
                               derive_seed(seed, 1));
  });
  const OccupancyEstimate estimate =
      staged("estimate", [&] { return mb_estimate(split, rollouts); });
  auto [interactions, model] = staged("explore", [&] {
    return rf_explore(env, ExplorationConfig{budget.exploration_episodes, delta, 0.0,
                                             derive_seed(seed, 2)});
  });
  (void)interactions;
  return staged("solve", [&] {
    auto [policy, report] = ogd_saddle_solve(model.model(env.mdp.initial), estimate, saddle);
    (void)report;
    return policy;
  });
}

}  // namespace imbench
