#include "imbench/envs.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace imbench {

std::string to_string(EnvFamily family) {
  switch (family) {
    case EnvFamily::standard_imitation: return "standard_imitation";
    case EnvFamily::reset_cliff: return "reset_cliff";
    case EnvFamily::custom: return "custom";
  }
  return "unknown";
}

EnvFamily env_family_from_string(const std::string& name) {
  if (name == "standard_imitation") return EnvFamily::standard_imitation;
  if (name == "reset_cliff") return EnvFamily::reset_cliff;
  if (name == "custom") return EnvFamily::custom;
  throw std::invalid_argument("unknown environment family: " + name);
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

EnvironmentSpec parse_environment_spec(std::istream& in) {
  EnvironmentSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("environment spec line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key == "family") {
      spec.family = env_family_from_string(value);
    } else if (key == "S") {
      spec.num_states = std::stoi(value);
    } else if (key == "A") {
      spec.num_actions = std::stoi(value);
    } else if (key == "H") {
      spec.horizon = std::stoi(value);
    } else if (key == "m_param") {
      spec.m_param = std::stoll(value);
    } else if (key == "rho") {
      std::istringstream fields(value);
      std::vector<double> rho;
      double v = 0.0;
      while (fields >> v) rho.push_back(v);
      spec.rho = std::move(rho);
    } else {
      throw std::invalid_argument("environment spec line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  return spec;
}

EnvironmentSpec parse_environment_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_environment_spec(in);
}

Environment make_standard_imitation(int num_states, int num_actions, int horizon,
                                    std::vector<double> rho) {
  if (num_states < 1 || num_actions < 1 || horizon < 1) {
    throw std::invalid_argument("make_standard_imitation: S, A, H must be >= 1");
  }
  if (static_cast<int>(rho.size()) != num_states) {
    throw std::invalid_argument("make_standard_imitation: rho has size " +
                                std::to_string(rho.size()) + ", expected " +
                                std::to_string(num_states));
  }
  detail::check_distribution(rho, kRowSumTol, "make_standard_imitation rho");
  TabularMDP mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.horizon = horizon;
  const std::size_t n_sa = static_cast<std::size_t>(horizon) * num_states * num_actions;
  mdp.transition.assign(n_sa * num_states, 0.0);
  mdp.reward.assign(n_sa, 0.0);
  mdp.initial = std::move(rho);
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        mdp.transition_at(h, s, a, s) = 1.0;
        if (a == 0) mdp.reward_at(h, s, a) = 1.0;
      }
    }
  }
  return Environment{std::move(mdp), Policy::constant(num_states, num_actions, horizon, 0)};
}

Environment make_reset_cliff(int num_states, int num_actions, int horizon,
                             long long m_param) {
  if (num_states < 2) {
    throw std::invalid_argument("make_reset_cliff: need at least one good and one bad state");
  }
  if (num_actions < 1 || horizon < 1) {
    throw std::invalid_argument("make_reset_cliff: A, H must be >= 1");
  }
  if (m_param < num_states - 2) {
    throw std::invalid_argument("make_reset_cliff: m_param " + std::to_string(m_param) +
                                " too small for a valid initial distribution (need >= S-2)");
  }
  const int S = num_states, A = num_actions, H = horizon;
  const int bad = S - 1;
  std::vector<double> rho(static_cast<std::size_t>(S), 0.0);
  const double unit = 1.0 / static_cast<double>(m_param + 1);
  double rest = 1.0;
  for (int s = 0; s + 2 < S; ++s) {
    rho[s] = unit;
    rest -= unit;
  }
  rho[S - 2] = rest;  // 1 - (S-2)/(m+1), strictly positive when m_param >= S-2
  rho[bad] = 0.0;

  TabularMDP mdp;
  mdp.num_states = S;
  mdp.num_actions = A;
  mdp.horizon = H;
  const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;
  mdp.transition.assign(n_sa * S, 0.0);
  mdp.reward.assign(n_sa, 0.0);
  mdp.initial = rho;
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        if (s == bad) {
          mdp.transition_at(h, s, a, bad) = 1.0;
        } else if (a == 0) {
          for (int sn = 0; sn < S - 1; ++sn) mdp.transition_at(h, s, a, sn) = rho[sn];
          mdp.reward_at(h, s, a) = 1.0;
        } else {
          mdp.transition_at(h, s, a, bad) = 1.0;
        }
      }
    }
  }
  return Environment{std::move(mdp), Policy::constant(S, A, H, 0)};
}

Environment build_environment(const EnvironmentSpec& spec) {
  switch (spec.family) {
    case EnvFamily::standard_imitation: {
      std::vector<double> rho;
      if (spec.rho) {
        rho = *spec.rho;
      } else {
        rho.assign(static_cast<std::size_t>(spec.num_states), 1.0 / spec.num_states);
      }
      return make_standard_imitation(spec.num_states, spec.num_actions, spec.horizon,
                                     std::move(rho));
    }
    case EnvFamily::reset_cliff: {
      if (!spec.m_param) {
        throw std::invalid_argument("build_environment: reset_cliff requires m_param");
      }
      return make_reset_cliff(spec.num_states, spec.num_actions, spec.horizon, *spec.m_param);
    }
    case EnvFamily::custom:
      throw std::invalid_argument("build_environment: custom environments are constructed "
                                  "directly, not from a family spec");
  }
  throw std::logic_error("build_environment: unreachable");
}

void check_standard_imitation(const TabularMDP& mdp) {
  mdp.validate();
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < mdp.num_actions; ++a) {
        if (mdp.transition_at(h, s, a, s) != 1.0) {
          throw std::invalid_argument("not Standard Imitation: state " + std::to_string(s) +
                                      " is not absorbing at (h=" + std::to_string(h) +
                                      ", a=" + std::to_string(a) + ")");
        }
        const double want = a == 0 ? 1.0 : 0.0;
        if (mdp.reward_at(h, s, a) != want) {
          throw std::invalid_argument("not Standard Imitation: reward at (h=" +
                                      std::to_string(h) + ", s=" + std::to_string(s) +
                                      ", a=" + std::to_string(a) + ")");
        }
      }
    }
  }
}

void check_reset_cliff(const TabularMDP& mdp) {
  mdp.validate();
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  if (S < 2) throw std::invalid_argument("not Reset Cliff: fewer than 2 states");
  const int bad = S - 1;
  for (int h = 0; h < H; ++h) {
    for (int a = 0; a < A; ++a) {
      if (mdp.transition_at(h, bad, a, bad) != 1.0) {
        throw std::invalid_argument("not Reset Cliff: bad state not absorbing");
      }
      if (mdp.reward_at(h, bad, a) != 0.0) {
        throw std::invalid_argument("not Reset Cliff: bad state has nonzero reward");
      }
    }
    for (int s = 0; s < bad; ++s) {
      for (int a = 0; a < A; ++a) {
        const double want = a == 0 ? 1.0 : 0.0;
        if (mdp.reward_at(h, s, a) != want) {
          throw std::invalid_argument("not Reset Cliff: reward at (h=" + std::to_string(h) +
                                      ", s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                                      ")");
        }
        if (a == 0) {
          for (int sn = 0; sn < bad; ++sn) {
            if (mdp.transition_at(h, s, a, sn) <= 0.0) {
              throw std::invalid_argument(
                  "not Reset Cliff: expert action lacks positive flow from good state " +
                  std::to_string(s) + " to good state " + std::to_string(sn));
            }
          }
        } else {
          for (int sn = 0; sn < bad; ++sn) {
            if (mdp.transition_at(h, s, a, sn) != 0.0) {
              throw std::invalid_argument(
                  "not Reset Cliff: non-expert action reaches good state from state " +
                  std::to_string(s));
            }
          }
        }
      }
    }
  }
  if (mdp.initial[bad] != 0.0) {
    throw std::invalid_argument("not Reset Cliff: initial mass on the bad state");
  }
}

}  // namespace imbench
