#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "imbench/estimators.hpp"
#include "imbench/rng.hpp"
#include "test_util.hpp"

using namespace imbench;
namespace tu = imbench::testutil;

TEST_CASE("mle_estimate: worked values, one-hot, concentration") {
  const OccupancyEstimate est = mle_estimate(tu::absorbing_pair_dataset());
  est.validate();
  CHECK(est.at(0, 0, 0) == 0.4);
  CHECK(est.at(0, 0, 1) == 0.0);
  CHECK(est.at(0, 1, 0) == 0.6);
  CHECK(est.at(0, 1, 1) == 0.0);

  TrajectoryDataset one{3, 2, 2, {{{0, 1}, {2, 0}}}};
  const OccupancyEstimate single = mle_estimate(one);
  CHECK(single.at(0, 0, 1) == 1.0);
  CHECK(single.at(1, 2, 0) == 1.0);

  CHECK_THROWS_AS(mle_estimate(TrajectoryDataset{2, 2, 1, {}}), std::invalid_argument);

  // Average per-step L1 error over 100 seeds within 3 sqrt((S-1)/m).
  Environment env = tu::cliff_toy_environment();
  const OccupancyMeasure truth = occupancy(env.mdp, env.expert);
  const std::size_t m = 2000;
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TrajectoryDataset data = sample_trajectories(env.mdp, env.expert, m, 3000 + seed);
    total += estimation_error_l1(mle_estimate(data), truth) / env.mdp.horizon;
  }
  const double bound = 3.0 * std::sqrt((3.0 - 1.0) / static_cast<double>(m));
  CHECK(total / 100.0 <= bound);
}

TEST_CASE("bc_fit: toy instances and full coverage") {
  Environment env1 = tu::absorbing_pair_environment();
  const BcPolicy bc1 = bc_fit(tu::absorbing_pair_dataset(), 2);
  CHECK_FALSE(bc1.empty_dataset);
  CHECK(bc1.policy.at(0, 0, 0) == 1.0);
  CHECK(bc1.policy.at(0, 1, 0) == 1.0);
  CHECK(policy_value(env1.mdp, env1.expert) - policy_value(env1.mdp, bc1.policy) ==
        0.0);

  Environment env2 = tu::cliff_toy_environment();
  const BcPolicy bc2 = bc_fit(tu::cliff_toy_dataset(), 2);
  CHECK(bc2.policy.at(0, 1, 0) == 0.5);  // uniform on the unvisited good state
  CHECK(bc2.policy.at(0, 1, 1) == 0.5);
  CHECK(policy_value(env2.mdp, env2.expert) - policy_value(env2.mdp, bc2.policy) ==
        doctest::Approx(0.5).epsilon(1e-14));

  // Full coverage of a deterministic environment recovers the expert.
  Environment det = make_standard_imitation(3, 2, 2, {0.5, 0.25, 0.25});
  const TrajectoryDataset big = sample_trajectories(det.mdp, det.expert, 200, 5);
  const BcPolicy full = bc_fit(big, 2);
  CHECK(policy_value(det.mdp, det.expert) - policy_value(det.mdp, full.policy) ==
        0.0);

  const BcPolicy empty = bc_fit(TrajectoryDataset{3, 2, 2, {}}, 2);
  CHECK(empty.empty_dataset);
  CHECK(empty.policy.at(1, 2, 0) == 0.5);
}

TEST_CASE("bc agreement: expert action with probability 1 on visited pairs") {
  Environment env = make_reset_cliff(5, 3, 4, 50);
  const TrajectoryDataset data = sample_trajectories(env.mdp, env.expert, 40, 8);
  const BcPolicy bc = bc_fit(data, 3);
  for (const Trajectory& tr : data.trajectories) {
    for (int h = 0; h < 4; ++h) {
      CHECK(bc.policy.at(h, tr[h].first, tr[h].second) == 1.0);
    }
  }
}

TEST_CASE("split_dataset: halving, determinism, odd datasets") {
  Environment env = tu::cliff_toy_environment();
  const TrajectoryDataset data = sample_trajectories(env.mdp, env.expert, 10, 3);
  const DatasetSplit split = split_dataset(data, 99);
  CHECK(split.d1.size() == 5);
  CHECK(split.d1_complement.size() == 5);

  const DatasetSplit again = split_dataset(data, 99);
  CHECK(again.d1.trajectories == split.d1.trajectories);

  const TrajectoryDataset odd = sample_trajectories(env.mdp, env.expert, 11, 3);
  const DatasetSplit dropped = split_dataset(odd, 5);
  CHECK(dropped.d1.size() == 5);
  CHECK(dropped.d1_complement.size() == 5);

  CHECK_THROWS_AS(split_dataset(TrajectoryDataset{3, 2, 2, {}}, 1), std::invalid_argument);

  // Identical trajectories give identical visited sets, whatever the split.
  TrajectoryDataset same{3, 2, 2, {}};
  for (int i = 0; i < 6; ++i) same.trajectories.push_back({{0, 0}, {1, 0}});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DatasetSplit s = split_dataset(same, seed);
    CHECK(s.in_visited(0, 0));
    CHECK(s.in_visited(1, 1));
    CHECK_FALSE(s.in_visited(0, 1));
  }
}

TEST_CASE("split enumeration covers all C(10,5) = 252 partitions") {
  const auto subsets = all_half_subsets(10);
  CHECK(subsets.size() == 252);
  const TrajectoryDataset data = tu::absorbing_pair_dataset();
  for (const auto& pick : subsets) {
    const DatasetSplit split = split_with_indices(data, pick);
    CHECK(split.d1.size() == 5);
  }
}

TEST_CASE("split rejects conflicting expert actions") {
  TrajectoryDataset bad{2, 2, 1, {}};
  bad.trajectories.push_back({{0, 0}});
  bad.trajectories.push_back({{0, 1}});
  CHECK_THROWS_AS(split_with_indices(bad, {0, 1}), std::invalid_argument);
}

TEST_CASE("mimic_md_estimate: informative split is exact") {
  Environment env = tu::absorbing_pair_environment();
  const TrajectoryDataset data = tu::absorbing_pair_dataset();
  // D1 holding both (s0,a0) and (s1,a0) gives the exact estimate.
  const DatasetSplit split = split_with_indices(data, {0, 1, 2, 4, 5});
  const OccupancyEstimate est = mimic_md_estimate(env.mdp, split);
  est.validate();
  CHECK(est.at(0, 0, 0) == 0.5);
  CHECK(est.at(0, 1, 0) == 0.5);
  CHECK(estimation_error_l1(est, occupancy(env.mdp, env.expert)) == 0.0);
}

TEST_CASE("mimic_md_estimate: exhaustive split enumeration on the worked instance") {
  Environment env = tu::absorbing_pair_environment();
  const TrajectoryDataset data = tu::absorbing_pair_dataset();
  const OccupancyMeasure truth = occupancy(env.mdp, env.expert);
  const auto subsets = all_half_subsets(10);
  double total_error = 0.0;
  int partially_informative = 0;
  for (const auto& pick : subsets) {
    const DatasetSplit split = split_with_indices(data, pick);
    const OccupancyEstimate est = mimic_md_estimate(env.mdp, split);
    total_error += estimation_error_l1(est, truth);
    if (!split.in_visited(0, 0)) ++partially_informative;
    CHECK(split.in_visited(0, 1));  // five of the six s1 demos cannot all miss
  }
  const double mean_error = total_error / 252.0;
  CHECK(mean_error == doctest::Approx(1.0 / 140.0).epsilon(1e-12));
  CHECK(partially_informative == 6);  // probability 6/252 = 1/42
}

TEST_CASE("mimic_md_estimate: full coverage kills the second term") {
  Environment env = make_reset_cliff(4, 2, 3, 30);
  const TrajectoryDataset data = sample_trajectories(env.mdp, env.expert, 400, 12);
  const DatasetSplit split = split_dataset(data, 13);
  bool all_visited = true;
  for (int h = 0; h < 3 && all_visited; ++h) {
    for (int s = 0; s < 3; ++s) {
      if (!split.in_visited(h, s)) {
        all_visited = false;
        break;
      }
    }
  }
  REQUIRE(all_visited);  // 200 trajectories cover 3 good states w.h.p.
  const OccupancyEstimate est = mimic_md_estimate(env.mdp, split);
  CHECK(estimation_error_l1(est, occupancy(env.mdp, env.expert)) < 1e-12);
}

TEST_CASE("mimic_md unbiasedness: exact enumeration over datasets and splits") {
  // Expectation over both the data draw and the split equals the true
  // occupancy. On the worked instance each of the 2^10 start-state
  // sequences is equally likely.
  Environment env = tu::absorbing_pair_environment();
  const OccupancyMeasure truth = occupancy(env.mdp, env.expert);
  const auto subsets = all_half_subsets(10);
  // Kahan-compensated accumulation keeps the quarter-million-term average
  // accurate to the stated 1e-12.
  std::vector<double> mean(4, 0.0), compensation(4, 0.0);
  const double dataset_weight = 1.0 / 1024.0;
  for (int mask = 0; mask < 1024; ++mask) {
    TrajectoryDataset data{2, 2, 1, {}};
    for (int i = 0; i < 10; ++i) data.trajectories.push_back({{(mask >> i) & 1, 0}});
    const double split_weight = dataset_weight / static_cast<double>(subsets.size());
    for (const auto& pick : subsets) {
      const DatasetSplit split = split_with_indices(data, pick);
      const OccupancyEstimate est = mimic_md_estimate(env.mdp, split);
      for (std::size_t i = 0; i < 4; ++i) {
        const double term = split_weight * est.est[i] - compensation[i];
        const double next = mean[i] + term;
        compensation[i] = (next - mean[i]) - term;
        mean[i] = next;
      }
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(mean[i] == doctest::Approx(truth.dist[i]).epsilon(1e-12));
  }
}

TEST_CASE("mimic_md dominance in expectation over the MLE") {
  Environment env = tu::absorbing_pair_environment();
  const TrajectoryDataset data = tu::absorbing_pair_dataset();
  const OccupancyMeasure truth = occupancy(env.mdp, env.expert);
  const double mle_error = estimation_error_l1(mle_estimate(data), truth);
  CHECK(mle_error == doctest::Approx(0.2).epsilon(1e-12));
  const auto subsets = all_half_subsets(10);
  double total = 0.0;
  for (const auto& pick : subsets) {
    total += estimation_error_l1(mimic_md_estimate(env.mdp, split_with_indices(data, pick)),
                                 truth);
  }
  CHECK(total / 252.0 < mle_error);
}

TEST_CASE("mle unbiasedness: single-trajectory enumeration") {
  const TabularMDP mdp = tu::random_mdp(2, 2, 2, 71);
  const Policy pi = tu::random_policy(2, 2, 2, 72);
  const std::vector<double> truth = tu::enumeration_occupancy(mdp, pi);
  std::vector<double> mean(truth.size(), 0.0);
  tu::enumerate_trajectories(mdp, pi, [&](const Trajectory& tr, double prob) {
    TrajectoryDataset one{2, 2, 2, {tr}};
    const OccupancyEstimate est = mle_estimate(one);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += prob * est.est[i];
  });
  for (std::size_t i = 0; i < mean.size(); ++i) {
    CHECK(mean[i] == doctest::Approx(truth[i]).epsilon(1e-12));
  }
}

TEST_CASE("mb_estimate: degenerate rollouts, DP agreement, concentration") {
  Environment env = tu::cliff_toy_environment();
  const TrajectoryDataset data = sample_trajectories(env.mdp, env.expert, 20, 31);
  const DatasetSplit split = split_dataset(data, 32);

  const OccupancyEstimate none = mb_estimate(split, TrajectoryDataset{3, 2, 2, {}});
  CHECK(none.degenerate);

  // Mean over many rollout seeds matches the exact first term of the
  // transition-aware estimator.
  const OccupancyEstimate exact = mimic_md_estimate(env.mdp, split);
  const BcPolicy bc = bc_fit(split.d1, 2);
  std::vector<double> mean(exact.est.size(), 0.0);
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const TrajectoryDataset rollouts =
        sample_trajectories(env.mdp, bc.policy, 10, 50000 + static_cast<std::uint64_t>(i));
    const OccupancyEstimate est = mb_estimate(split, rollouts);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += est.est[j] / trials;
  }
  CHECK(tu::max_abs_diff(mean, exact.est) < 0.01);
}

TEST_CASE("mb_estimate concentrates with enough data and rollouts") {
  Environment env = tu::cliff_toy_environment();
  const OccupancyMeasure truth = occupancy(env.mdp, env.expert);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TrajectoryDataset data =
        sample_trajectories(env.mdp, env.expert, 2000, 7000 + seed);
    const DatasetSplit split = split_dataset(data, 8000 + seed);
    const BcPolicy bc = bc_fit(split.d1, 2);
    const TrajectoryDataset rollouts =
        sample_trajectories(env.mdp, bc.policy, 5000, 9000 + seed);
    const OccupancyEstimate est = mb_estimate(split, rollouts);
    if (estimation_error_l1(est, truth) <= 0.1) ++ok;
  }
  CHECK(ok >= 95);
}

TEST_CASE("mb_estimate rejects rollouts that disagree with the expert on D1") {
  Environment env = tu::cliff_toy_environment();
  const TrajectoryDataset data = sample_trajectories(env.mdp, env.expert, 10, 41);
  const DatasetSplit split = split_dataset(data, 42);
  TrajectoryDataset bad{3, 2, 2, {{{0, 1}, {2, 0}}}};
  CHECK_THROWS_AS(mb_estimate(split, bad), std::invalid_argument);
}

TEST_CASE("fit_empirical_model: law of large numbers, fallback, determinism") {
  const TabularMDP mdp = tu::random_mdp(3, 2, 3, 81);
  const Policy uniform = Policy::uniform(3, 2, 3);
  // 300k episodes put >= 50k-ish visits on every (h, s, a).
  const TrajectoryDataset big = sample_trajectories(mdp, uniform, 300000, 82);
  const EmpiricalModel model = fit_empirical_model(big, 3, 2, 3);
  double worst_row = 0.0;
  for (int h = 0; h + 1 < 3; ++h) {
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        CHECK(model.visits(h, s, a) >= 10000);
        double err = 0.0;
        for (int sn = 0; sn < 3; ++sn) {
          err += std::abs(model.transition[(((static_cast<std::size_t>(h) * 3 + s) * 2 + a) * 3) +
                                           sn] -
                          mdp.transition_at(h, s, a, sn));
        }
        worst_row = std::max(worst_row, err);
      }
    }
  }
  CHECK(worst_row <= 0.05);

  const EmpiricalModel empty = fit_empirical_model(TrajectoryDataset{3, 2, 3, {}}, 3, 2, 3);
  CHECK(empty.degenerate);
  for (double p : empty.transition) CHECK(p == 1.0 / 3.0);

  // Deterministic transitions are recovered exactly from one visit.
  Environment det = make_standard_imitation(3, 2, 3, {0.4, 0.3, 0.3});
  TrajectoryDataset once{3, 2, 3, {}};
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) once.trajectories.push_back({{s, a}, {s, a}, {s, a}});
  }
  const EmpiricalModel exact = fit_empirical_model(once, 3, 2, 3);
  for (int h = 0; h + 1 < 3; ++h) {
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        CHECK(exact.transition[(((static_cast<std::size_t>(h) * 3 + s) * 2 + a) * 3) + s] == 1.0);
      }
    }
  }
}

TEST_CASE("estimation_error_l1: zero, worked value, disjoint supports") {
  Environment env = tu::absorbing_pair_environment();
  const OccupancyMeasure truth = occupancy(env.mdp, env.expert);
  OccupancyEstimate copy{2, 2, 1, truth.dist, EstimateKind::mle, false};
  CHECK(estimation_error_l1(copy, truth) == 0.0);

  CHECK(estimation_error_l1(mle_estimate(tu::absorbing_pair_dataset()), truth) ==
        doctest::Approx(0.2).epsilon(1e-12));

  // Disjoint supports max out at 2 per step.
  const int H = 3;
  Environment env3 = make_standard_imitation(2, 2, H, {1.0, 0.0});
  const OccupancyMeasure t3 = occupancy(env3.mdp, env3.expert);
  OccupancyEstimate disjoint{2, 2, H,
                             std::vector<double>(t3.dist.size(), 0.0), EstimateKind::mle, false};
  for (int h = 0; h < H; ++h) disjoint.at(h, 1, 1) = 1.0;
  CHECK(estimation_error_l1(disjoint, t3) == 2.0 * H);
}

TEST_CASE("mle concentration shape: mean per-step error under the bound") {
  // Uniform-initial absorbing instance, the hardest case for the MLE.
  Environment env = make_standard_imitation(
      20, 2, 1, std::vector<double>(20, 0.05));
  const OccupancyMeasure truth = occupancy(env.mdp, env.expert);
  for (std::size_t m : {50, 500}) {
    double total = 0.0;
    const int seeds = 1000;
    for (int seed = 0; seed < seeds; ++seed) {
      const TrajectoryDataset data =
          sample_trajectories(env.mdp, env.expert, m, 100000 + seed);
      total += estimation_error_l1(mle_estimate(data), truth);
    }
    CHECK(total / seeds <= std::sqrt(19.0 / static_cast<double>(m)));
  }
}
