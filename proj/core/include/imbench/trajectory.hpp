#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "imbench/mdp.hpp"

namespace imbench {

/// One episode: H (state, action) pairs.
using Trajectory = std::vector<std::pair<int, int>>;

/// A set of expert or interaction trajectories of fixed length H.
struct TrajectoryDataset {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }

  /// Every trajectory has exactly H steps with states < S and actions < A.
  void validate() const;
};

/// Draws m i.i.d. episodes of `policy` in `mdp`; a pure function of the seed.
TrajectoryDataset sample_trajectories(const TabularMDP& mdp, const Policy& policy,
                                      std::size_t m, std::uint64_t seed);

/// Text format: one trajectory per line, "s a s a ... s a" space-separated.
void save_trajectories(const TrajectoryDataset& data, std::ostream& out);
void save_trajectories(const TrajectoryDataset& data, const std::string& path);
TrajectoryDataset load_trajectories(std::istream& in, int num_states, int num_actions,
                                    int horizon);
TrajectoryDataset load_trajectories(const std::string& path, int num_states, int num_actions,
                                    int horizon);

}  // namespace imbench
