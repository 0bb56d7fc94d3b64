#include "imbench/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "imbench/rng.hpp"

namespace imbench {

std::string to_string(EstimateKind kind) {
  switch (kind) {
    case EstimateKind::mle: return "mle";
    case EstimateKind::mimic_md: return "mimic_md";
    case EstimateKind::mb: return "mb";
  }
  return "unknown";
}

void OccupancyEstimate::validate() const {
  if (est.size() != static_cast<std::size_t>(horizon) * num_states * num_actions) {
    throw std::invalid_argument("OccupancyEstimate: size mismatch");
  }
  for (int h = 0; h < horizon; ++h) {
    double mass = 0.0;
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        const double v = at(h, s, a);
        if (v < 0.0) {
          throw std::invalid_argument("OccupancyEstimate: negative entry at (h=" +
                                      std::to_string(h) + ", s=" + std::to_string(s) +
                                      ", a=" + std::to_string(a) + ")");
        }
        mass += v;
      }
    }
    if (kind == EstimateKind::mle) {
      if (std::abs(mass - 1.0) > 1e-12) {
        throw std::invalid_argument("OccupancyEstimate(mle): step " + std::to_string(h) +
                                    " mass " + std::to_string(mass) + " not 1");
      }
    } else if (mass > 2.0 + 1e-12) {
      throw std::invalid_argument("OccupancyEstimate: step " + std::to_string(h) + " mass " +
                                  std::to_string(mass) + " exceeds 2");
    }
  }
}

OccupancyEstimate mle_estimate(const TrajectoryDataset& dataset) {
  if (dataset.empty()) throw std::invalid_argument("mle_estimate: empty dataset");
  const int S = dataset.num_states, A = dataset.num_actions, H = dataset.horizon;
  OccupancyEstimate out{S, A, H,
                        std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0),
                        EstimateKind::mle, false};
  const double w = 1.0 / static_cast<double>(dataset.size());
  for (const Trajectory& tr : dataset.trajectories) {
    for (int h = 0; h < H; ++h) out.at(h, tr[h].first, tr[h].second) += w;
  }
  return out;
}

BcPolicy bc_fit(const TrajectoryDataset& dataset, int num_actions) {
  const int S = dataset.num_states, H = dataset.horizon, A = num_actions;
  if (dataset.empty()) {
    return BcPolicy{Policy::uniform(S, A, H), true};
  }
  std::vector<std::int64_t> counts(static_cast<std::size_t>(H) * S * A, 0);
  for (const Trajectory& tr : dataset.trajectories) {
    for (int h = 0; h < H; ++h) {
      const auto [s, a] = tr[h];
      if (a >= A) throw std::invalid_argument("bc_fit: action out of range");
      counts[(static_cast<std::size_t>(h) * S + s) * A + a] += 1;
    }
  }
  Policy policy = Policy::uniform(S, A, H);
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      std::int64_t total = 0;
      for (int a = 0; a < A; ++a) total += counts[(static_cast<std::size_t>(h) * S + s) * A + a];
      if (total == 0) continue;
      for (int a = 0; a < A; ++a) {
        policy.at(h, s, a) =
            static_cast<double>(counts[(static_cast<std::size_t>(h) * S + s) * A + a]) /
            static_cast<double>(total);
      }
    }
  }
  return BcPolicy{std::move(policy), false};
}

namespace {

DatasetSplit build_split(const TrajectoryDataset& dataset, const std::vector<int>& d1_indices) {
  const int S = dataset.num_states, A = dataset.num_actions, H = dataset.horizon;
  std::vector<char> in_d1(dataset.size(), 0);
  for (int idx : d1_indices) {
    if (idx < 0 || idx >= static_cast<int>(dataset.size())) {
      throw std::invalid_argument("split: index " + std::to_string(idx) + " out of range");
    }
    if (in_d1[idx]) throw std::invalid_argument("split: duplicate index " + std::to_string(idx));
    in_d1[idx] = 1;
  }
  DatasetSplit split;
  split.d1 = TrajectoryDataset{S, A, H, {}};
  split.d1_complement = TrajectoryDataset{S, A, H, {}};
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (in_d1[i] ? split.d1 : split.d1_complement).trajectories.push_back(dataset.trajectories[i]);
  }
  split.visited.assign(H, std::vector<char>(S, 0));
  split.expert_action.assign(H, std::vector<int>(S, -1));
  for (const Trajectory& tr : split.d1.trajectories) {
    for (int h = 0; h < H; ++h) {
      const auto [s, a] = tr[h];
      split.visited[h][s] = 1;
      int& prev = split.expert_action[h][s];
      if (prev >= 0 && prev != a) {
        throw std::invalid_argument(
            "split: conflicting expert actions at (h=" + std::to_string(h) +
            ", s=" + std::to_string(s) + "); the expert must be deterministic");
      }
      prev = a;
    }
  }
  return split;
}

}  // namespace

DatasetSplit split_dataset(const TrajectoryDataset& dataset, std::uint64_t seed) {
  if (dataset.size() < 2) {
    throw std::invalid_argument("split_dataset: need at least 2 trajectories, have " +
                                std::to_string(dataset.size()));
  }
  Rng rng(seed);
  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  if (order.size() % 2 != 0) order.pop_back();  // drop one uniformly random trajectory
  const std::size_t half = order.size() / 2;
  std::vector<int> d1(order.begin(), order.begin() + half);
  if (order.size() < dataset.size()) {
    // Rebuild against the reduced dataset so |D1| == |D1c|.
    TrajectoryDataset reduced{dataset.num_states, dataset.num_actions, dataset.horizon, {}};
    std::vector<char> kept(dataset.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) kept[order[i]] = 1;
    std::vector<int> remap(dataset.size(), -1);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (kept[i]) {
        remap[i] = static_cast<int>(reduced.trajectories.size());
        reduced.trajectories.push_back(dataset.trajectories[i]);
      }
    }
    for (int& idx : d1) idx = remap[idx];
    return build_split(reduced, d1);
  }
  return build_split(dataset, d1);
}

DatasetSplit split_with_indices(const TrajectoryDataset& dataset,
                                const std::vector<int>& d1_indices) {
  if (dataset.size() % 2 != 0 || d1_indices.size() != dataset.size() / 2) {
    throw std::invalid_argument("split_with_indices: need |D1| = |D|/2 with even |D|");
  }
  return build_split(dataset, d1_indices);
}

std::vector<std::vector<int>> all_half_subsets(int m) {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("all_half_subsets: m must be even >= 2");
  const int k = m / 2;
  std::vector<std::vector<int>> out;
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    out.push_back(pick);
    int i = k - 1;
    while (i >= 0 && pick[i] == m - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

namespace {

void check_split_dims(const DatasetSplit& split, int S, int A, int H) {
  if (split.d1.num_states != S || split.d1.num_actions != A || split.d1.horizon != H) {
    throw std::invalid_argument("split inconsistent with model dimensions (S=" +
                                std::to_string(S) + ", A=" + std::to_string(A) +
                                ", H=" + std::to_string(H) + ")");
  }
}

/// Exact mass of expert trajectory prefixes that stay inside the visited
/// sets: Q_1(s) = rho(s) 1{s in S_1}, Q_{h+1}(s') = sum_s Q_h(s)
/// P_h(s'|s, aE_h(s)) 1{s' in S_{h+1}}, term(h, s, aE_h(s)) = Q_h(s).
std::vector<double> exact_covered_term(const TabularMDP& mdp, const DatasetSplit& split) {
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  std::vector<double> term(static_cast<std::size_t>(H) * S * A, 0.0);
  std::vector<double> q(static_cast<std::size_t>(S), 0.0);
  for (int s = 0; s < S; ++s) {
    if (split.in_visited(0, s)) q[s] = mdp.initial[s];
  }
  std::vector<double> next(static_cast<std::size_t>(S), 0.0);
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      if (q[s] == 0.0 || !split.in_visited(h, s)) continue;
      term[(static_cast<std::size_t>(h) * S + s) * A + split.expert_action[h][s]] = q[s];
    }
    if (h + 1 == H) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      if (q[s] == 0.0) continue;
      const auto row = mdp.model().row(h, s, split.expert_action[h][s]);
      for (int sn = 0; sn < S; ++sn) {
        if (split.in_visited(h + 1, sn)) next[sn] += q[s] * row[sn];
      }
    }
    q.swap(next);
  }
  return term;
}

/// Adds the empirical fraction of `data` trajectories matching (s, a) at h
/// whose prefix leaves the visited sets at some step <= h.
void add_escaped_fraction_term(const DatasetSplit& split, const TrajectoryDataset& data,
                               std::vector<double>& est) {
  const int S = data.num_states, A = data.num_actions, H = data.horizon;
  const double w = 1.0 / static_cast<double>(data.size());
  for (const Trajectory& tr : data.trajectories) {
    bool inside = true;
    for (int h = 0; h < H; ++h) {
      const auto [s, a] = tr[h];
      inside = inside && split.in_visited(h, s);
      if (!inside) est[(static_cast<std::size_t>(h) * S + s) * A + a] += w;
    }
  }
}

}  // namespace

OccupancyEstimate mimic_md_estimate(const TabularMDP& mdp, const DatasetSplit& split) {
  check_split_dims(split, mdp.num_states, mdp.num_actions, mdp.horizon);
  OccupancyEstimate out{mdp.num_states, mdp.num_actions, mdp.horizon,
                        exact_covered_term(mdp, split), EstimateKind::mimic_md, false};
  if (split.d1_complement.empty()) {
    throw std::invalid_argument("mimic_md_estimate: empty D1 complement");
  }
  add_escaped_fraction_term(split, split.d1_complement, out.est);
  return out;
}

OccupancyEstimate mb_estimate(const DatasetSplit& split, const TrajectoryDataset& rollouts) {
  const int S = split.d1.num_states, A = split.d1.num_actions, H = split.d1.horizon;
  if (rollouts.num_states != S || rollouts.num_actions != A || rollouts.horizon != H) {
    throw std::invalid_argument("mb_estimate: rollouts inconsistent with split dimensions");
  }
  OccupancyEstimate out{S, A, H, std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0),
                        EstimateKind::mb, false};
  if (rollouts.empty()) {
    out.degenerate = true;  // first term unavailable
  } else {
    const double w = 1.0 / static_cast<double>(rollouts.size());
    for (const Trajectory& tr : rollouts.trajectories) {
      bool inside = true;
      for (int h = 0; h < H && inside; ++h) {
        const auto [s, a] = tr[h];
        if (!split.in_visited(h, s)) {
          inside = false;
          break;
        }
        if (split.expert_action[h][s] != a) {
          throw std::invalid_argument(
              "mb_estimate: rollout takes a non-expert action on a D1-visited state (h=" +
              std::to_string(h) + ", s=" + std::to_string(s) + ")");
        }
        out.est[(static_cast<std::size_t>(h) * S + s) * A + a] += w;
      }
    }
  }
  if (split.d1_complement.empty()) {
    throw std::invalid_argument("mb_estimate: empty D1 complement");
  }
  add_escaped_fraction_term(split, split.d1_complement, out.est);
  return out;
}

std::int64_t EmpiricalModel::total_visits() const {
  std::int64_t total = 0;
  for (std::int64_t c : count_sa) total += c;
  return total;
}

EmpiricalModel fit_empirical_model(const TrajectoryDataset& interactions, int num_states,
                                   int num_actions, int horizon) {
  const int S = num_states, A = num_actions, H = horizon;
  EmpiricalModel model;
  model.num_states = S;
  model.num_actions = A;
  model.horizon = H;
  const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;
  model.count_sa.assign(n_sa, 0);
  model.count_sas.assign(n_sa * S, 0);
  model.degenerate = interactions.empty();
  for (const Trajectory& tr : interactions.trajectories) {
    for (int h = 0; h + 1 < H; ++h) {
      const auto [s, a] = tr[h];
      const int sn = tr[h + 1].first;
      const std::size_t sa = (static_cast<std::size_t>(h) * S + s) * A + a;
      model.count_sa[sa] += 1;
      model.count_sas[sa * S + sn] += 1;
    }
    // The step-H action is counted for visit totals even though no successor
    // is observed inside the episode.
    if (H >= 1) {
      const auto [s, a] = tr[H - 1];
      model.count_sa[(static_cast<std::size_t>(H - 1) * S + s) * A + a] += 1;
    }
  }
  model.transition.assign(n_sa * S, 0.0);
  for (std::size_t sa = 0; sa < n_sa; ++sa) {
    std::int64_t row_total = 0;
    for (int sn = 0; sn < S; ++sn) row_total += model.count_sas[sa * S + sn];
    if (row_total == 0) {
      for (int sn = 0; sn < S; ++sn) model.transition[sa * S + sn] = 1.0 / S;
    } else {
      for (int sn = 0; sn < S; ++sn) {
        model.transition[sa * S + sn] =
            static_cast<double>(model.count_sas[sa * S + sn]) / static_cast<double>(row_total);
      }
    }
  }
  return model;
}

double estimation_error_l1(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) {
    throw std::invalid_argument("estimation_error_l1: size mismatch");
  }
  double err = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) err += std::abs(estimate[i] - truth[i]);
  return err;
}

double estimation_error_l1(const OccupancyEstimate& estimate, const OccupancyMeasure& truth) {
  if (estimate.num_states != truth.num_states || estimate.num_actions != truth.num_actions ||
      estimate.horizon != truth.horizon) {
    throw std::invalid_argument("estimation_error_l1: dimension mismatch");
  }
  return estimation_error_l1(estimate.est, truth.dist);
}

}  // namespace imbench
