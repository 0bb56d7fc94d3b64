#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "imbench/mdp.hpp"

namespace imbench {

enum class EnvFamily { standard_imitation, reset_cliff, custom };

std::string to_string(EnvFamily family);
EnvFamily env_family_from_string(const std::string& name);

/// Parameters of a hard-instance family, loadable from a line-oriented
/// "key = value" text spec (keys: family, S, A, H, rho, m_param).
struct EnvironmentSpec {
  EnvFamily family = EnvFamily::standard_imitation;
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::optional<std::vector<double>> rho;  // standard_imitation; default uniform
  std::optional<long long> m_param;        // reset_cliff initial distribution
};

EnvironmentSpec parse_environment_spec(std::istream& in);
EnvironmentSpec parse_environment_spec_file(const std::string& path);

/// Environment plus its deterministic expert policy.
struct Environment {
  TabularMDP mdp;
  Policy expert;
};

/// Every state absorbing, action 0 is the expert action with reward 1, all
/// other actions reward 0.
Environment make_standard_imitation(int num_states, int num_actions, int horizon,
                                    std::vector<double> rho);

/// Good states 0..S-2, bad absorbing state S-1. Action 0 from a good state
/// renews the next state according to rho (supported on the good states, with
/// masses 1/(m+1) and the remainder on the last good state); any other action
/// falls into the bad state. Rewards: 1 for action 0 on good states, else 0.
Environment make_reset_cliff(int num_states, int num_actions, int horizon,
                             long long m_param);

Environment build_environment(const EnvironmentSpec& spec);

/// Structural checks for the two families (throw on violation).
void check_standard_imitation(const TabularMDP& mdp);
void check_reset_cliff(const TabularMDP& mdp);

}  // namespace imbench
