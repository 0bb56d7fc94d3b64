#include "imbench/trajectory.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "imbench/rng.hpp"

namespace imbench {

void TrajectoryDataset::validate() const {
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& tr = trajectories[i];
    if (static_cast<int>(tr.size()) != horizon) {
      throw std::invalid_argument("trajectory " + std::to_string(i) + " has length " +
                                  std::to_string(tr.size()) + ", expected " +
                                  std::to_string(horizon));
    }
    for (int h = 0; h < horizon; ++h) {
      const auto [s, a] = tr[h];
      if (s < 0 || s >= num_states) {
        throw std::invalid_argument("trajectory " + std::to_string(i) + " step " +
                                    std::to_string(h) + ": state " + std::to_string(s) +
                                    " out of range");
      }
      if (a < 0 || a >= num_actions) {
        throw std::invalid_argument("trajectory " + std::to_string(i) + " step " +
                                    std::to_string(h) + ": action " + std::to_string(a) +
                                    " out of range");
      }
    }
  }
}

TrajectoryDataset sample_trajectories(const TabularMDP& mdp, const Policy& policy,
                                      std::size_t m, std::uint64_t seed) {
  if (mdp.num_states != policy.num_states || mdp.num_actions != policy.num_actions ||
      mdp.horizon != policy.horizon) {
    throw std::invalid_argument("sample_trajectories: dimension mismatch");
  }
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  TrajectoryDataset data{S, A, H, {}};
  data.trajectories.reserve(m);
  Rng rng(seed);
  const TransitionModel model = mdp.model();
  for (std::size_t i = 0; i < m; ++i) {
    Trajectory tr;
    tr.reserve(H);
    int s = rng.categorical(model.initial);
    for (int h = 0; h < H; ++h) {
      std::span<const double> row(&policy.action_prob[(static_cast<std::size_t>(h) * S + s) * A],
                                  static_cast<std::size_t>(A));
      const int a = rng.categorical(row);
      tr.emplace_back(s, a);
      if (h + 1 < H) s = rng.categorical(model.row(h, s, a));
    }
    data.trajectories.push_back(std::move(tr));
  }
  return data;
}

void save_trajectories(const TrajectoryDataset& data, std::ostream& out) {
  for (const Trajectory& tr : data.trajectories) {
    for (std::size_t h = 0; h < tr.size(); ++h) {
      if (h > 0) out << ' ';
      out << tr[h].first << ' ' << tr[h].second;
    }
    out << '\n';
  }
}

void save_trajectories(const TrajectoryDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_trajectories(data, out);
}

TrajectoryDataset load_trajectories(std::istream& in, int num_states, int num_actions,
                                    int horizon) {
  TrajectoryDataset data{num_states, num_actions, horizon, {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Trajectory tr;
    int s = 0, a = 0;
    while (fields >> s >> a) tr.emplace_back(s, a);
    if (!fields.eof()) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": malformed trajectory text");
    }
    data.trajectories.push_back(std::move(tr));
  }
  data.validate();
  return data;
}

TrajectoryDataset load_trajectories(const std::string& path, int num_states, int num_actions,
                                    int horizon) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_trajectories(in, num_states, num_actions, horizon);
}

}  // namespace imbench
