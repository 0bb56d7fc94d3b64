#include "imbench/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "imbench/rng.hpp"

namespace imbench {

namespace {

/// Compressed nonzero-transition view; the hard-instance families are very
/// sparse, which makes the T-iteration solver loops cheap.
struct SparseKernel {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<std::size_t> row_ptr;  // per (h, s, a)
  std::vector<int> col;
  std::vector<double> val;
  std::vector<double> initial;

  static SparseKernel build(const TransitionModel& model) {
    SparseKernel k;
    k.num_states = model.num_states;
    k.num_actions = model.num_actions;
    k.horizon = model.horizon;
    k.initial.assign(model.initial.begin(), model.initial.end());
    const std::size_t rows =
        static_cast<std::size_t>(model.horizon) * model.num_states * model.num_actions;
    k.row_ptr.assign(rows + 1, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t base = r * model.num_states;
      for (int sn = 0; sn < model.num_states; ++sn) {
        if (model.transition[base + sn] > 0.0) ++k.row_ptr[r + 1];
      }
    }
    for (std::size_t r = 0; r < rows; ++r) k.row_ptr[r + 1] += k.row_ptr[r];
    k.col.resize(k.row_ptr[rows]);
    k.val.resize(k.row_ptr[rows]);
    std::vector<std::size_t> cursor(k.row_ptr.begin(), k.row_ptr.end() - 1);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t base = r * model.num_states;
      for (int sn = 0; sn < model.num_states; ++sn) {
        const double p = model.transition[base + sn];
        if (p > 0.0) {
          k.col[cursor[r]] = sn;
          k.val[cursor[r]] = p;
          ++cursor[r];
        }
      }
    }
    return k;
  }

  std::size_t row(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
  }
};

/// Greedy backward induction. The public operation breaks ties toward the
/// lowest action index; the game solvers' inner best responses break toward
/// the highest. Both are exact argmaxes, but at reward saturation (every
/// weight clamped at -1) the low rule would hand ties to the expert action
/// and collapse the averaged iterate onto the zero-gap optimum, hiding the
/// statistical error the matching game is supposed to expose.
enum class TieRule { lowest, highest };

std::pair<Policy, double> vi_sparse(const SparseKernel& kernel, std::span<const double> reward,
                                    TieRule ties = TieRule::lowest) {
  const int S = kernel.num_states, A = kernel.num_actions, H = kernel.horizon;
  Policy policy{S, A, H, std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0), true};
  std::vector<double> value_next(static_cast<std::size_t>(S), 0.0);
  std::vector<double> value(static_cast<std::size_t>(S), 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        const std::size_t r = kernel.row(h, s, a);
        double q = reward[r];
        if (h + 1 < H) {
          for (std::size_t i = kernel.row_ptr[r]; i < kernel.row_ptr[r + 1]; ++i) {
            q += kernel.val[i] * value_next[kernel.col[i]];
          }
        }
        if (q > best || (ties == TieRule::highest && q == best)) {
          best = q;
          best_a = a;
        }
      }
      value[s] = best;
      policy.at(h, s, best_a) = 1.0;
    }
    value_next = value;
  }
  double v0 = 0.0;
  for (int s = 0; s < S; ++s) v0 += kernel.initial[s] * value[s];
  return {std::move(policy), v0};
}

void occupancy_sparse(const SparseKernel& kernel, const Policy& policy,
                      std::vector<double>& occ) {
  const int S = kernel.num_states, A = kernel.num_actions, H = kernel.horizon;
  occ.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  std::vector<double> state(kernel.initial);
  std::vector<double> next(static_cast<std::size_t>(S), 0.0);
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      const double ps = state[s];
      if (ps == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        occ[kernel.row(h, s, a)] = ps * policy.at(h, s, a);
      }
    }
    if (h + 1 == H) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::size_t r = kernel.row(h, s, a);
        const double mass = occ[r];
        if (mass == 0.0) continue;
        for (std::size_t i = kernel.row_ptr[r]; i < kernel.row_ptr[r + 1]; ++i) {
          next[kernel.col[i]] += mass * kernel.val[i];
        }
      }
    }
    state.swap(next);
  }
}

void check_estimate_dims(const TransitionModel& model, const OccupancyEstimate& estimate) {
  if (estimate.num_states != model.num_states || estimate.num_actions != model.num_actions ||
      estimate.horizon != model.horizon) {
    throw std::invalid_argument("estimate dimensions (S=" + std::to_string(estimate.num_states) +
                                ", A=" + std::to_string(estimate.num_actions) +
                                ", H=" + std::to_string(estimate.horizon) +
                                ") do not match the model");
  }
  for (double v : estimate.est) {
    if (v < 0.0) throw std::invalid_argument("estimate has a negative entry");
  }
}

void check_reward_range(std::span<const double> reward) {
  for (std::size_t i = 0; i < reward.size(); ++i) {
    if (reward[i] < -1.0 || reward[i] > 1.0) {
      throw std::invalid_argument("reward entry out of [-1, 1] at index " + std::to_string(i));
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

RewardWeights RewardWeights::zeros(int num_states, int num_actions, int horizon) {
  return RewardWeights{num_states, num_actions, horizon,
                       std::vector<double>(
                           static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0)};
}

void RewardWeights::project() {
  for (double& x : w) x = std::clamp(x, -1.0, 1.0);
}

void write_csv(const SolveReport& report, std::ostream& out) {
  out << "iteration,l1_objective,grad_norm,step_size\n";
  for (std::size_t t = 0; t < report.l1_objective.size(); ++t) {
    out << (t + 1) << ',' << format_double(report.l1_objective[t]) << ','
        << format_double(report.grad_norm[t]) << ',' << format_double(report.step_size[t])
        << '\n';
  }
}

void write_csv(const SolveReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(report, out);
}

std::pair<Policy, double> value_iteration(const TransitionModel& model,
                                          std::span<const double> reward) {
  const std::size_t n_sa =
      static_cast<std::size_t>(model.horizon) * model.num_states * model.num_actions;
  if (reward.size() != n_sa) throw std::invalid_argument("value_iteration: reward size mismatch");
  check_reward_range(reward);
  return vi_sparse(SparseKernel::build(model), reward);
}

std::vector<double> action_value(const TransitionModel& model, const Policy& policy,
                                 std::span<const double> reward) {
  const int S = model.num_states, A = model.num_actions, H = model.horizon;
  if (policy.num_states != S || policy.num_actions != A || policy.horizon != H) {
    throw std::invalid_argument("action_value: policy dimension mismatch");
  }
  const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;
  if (reward.size() != n_sa) throw std::invalid_argument("action_value: reward size mismatch");
  std::vector<double> q(n_sa, 0.0);
  std::vector<double> value_next(static_cast<std::size_t>(S), 0.0);
  std::vector<double> value(static_cast<std::size_t>(S), 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double vs = 0.0;
      for (int a = 0; a < A; ++a) {
        const std::size_t r = (static_cast<std::size_t>(h) * S + s) * A + a;
        double qsa = reward[r];
        if (h + 1 < H) {
          const auto row = model.row(h, s, a);
          for (int sn = 0; sn < S; ++sn) qsa += row[sn] * value_next[sn];
        }
        q[r] = qsa;
        vs += policy.at(h, s, a) * qsa;
      }
      value[s] = vs;
    }
    value_next = value;
  }
  return q;
}

double adaptive_diameter(int num_states, int num_actions, int horizon) {
  return std::sqrt(2.0 * horizon * num_states * num_actions);
}

double adaptive_step(std::span<const double> grad_norm_history, double diameter) {
  if (grad_norm_history.empty()) {
    throw std::invalid_argument("adaptive_step: empty gradient history");
  }
  double sum_sq = 0.0;
  for (double g : grad_norm_history) {
    if (g < 0.0) throw std::invalid_argument("adaptive_step: negative gradient norm");
    sum_sq += g * g;
  }
  if (sum_sq == 0.0) return diameter;
  return diameter / std::sqrt(sum_sq);
}

double saddle_slack(const TransitionModel& model, const SaddleConfig& config) {
  const double base =
      2.0 * model.horizon *
      std::sqrt(2.0 * model.num_states * model.num_actions / static_cast<double>(config.iterations));
  return (config.step_rule == StepRule::adaptive ? 2.0 * base : base) + config.epsilon_opt;
}

double l1_objective(std::span<const double> occ, std::span<const double> est) {
  if (occ.size() != est.size()) throw std::invalid_argument("l1_objective: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < occ.size(); ++i) total += std::abs(occ[i] - est[i]);
  return total;
}

std::pair<Policy, SolveReport> ogd_saddle_solve(const TransitionModel& model,
                                                const OccupancyEstimate& estimate,
                                                const SaddleConfig& config) {
  if (config.iterations < 1) throw std::invalid_argument("ogd_saddle_solve: T must be >= 1");
  check_estimate_dims(model, estimate);
  const int S = model.num_states, A = model.num_actions, H = model.horizon;
  const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;
  const int T = config.iterations;
  const SparseKernel kernel = SparseKernel::build(model);

  std::vector<double> w;
  if (config.initial_w.empty()) {
    w.assign(n_sa, 0.0);
  } else if (config.initial_w.size() == n_sa) {
    w = config.initial_w;
  } else {
    throw std::invalid_argument("ogd_saddle_solve: initial_w size mismatch");
  }

  const double fixed_eta = std::sqrt(static_cast<double>(S) * A / (8.0 * T));
  const double diameter = adaptive_diameter(S, A, H);
  double grad_sum_sq = 0.0;

  SolveReport report;
  report.l1_objective.reserve(T);
  report.objective.reserve(T);
  report.grad_norm.reserve(T);
  report.step_size.reserve(T);

  std::vector<double> occ;
  std::vector<double> mean_occ(n_sa, 0.0);
  std::vector<double> grad(n_sa, 0.0);
  for (int t = 0; t < T; ++t) {
    auto [pi, value] = vi_sparse(kernel, w, TieRule::highest);
    (void)value;
    occupancy_sparse(kernel, pi, occ);
    double norm_sq = 0.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i < n_sa; ++i) {
      grad[i] = occ[i] - estimate.est[i];
      norm_sq += grad[i] * grad[i];
      l1 += std::abs(grad[i]);
      mean_occ[i] += occ[i];
    }
    const double gnorm = std::sqrt(norm_sq);
    double eta = fixed_eta;
    if (config.step_rule == StepRule::adaptive) {
      grad_sum_sq += norm_sq;
      eta = grad_sum_sq == 0.0 ? diameter : diameter / std::sqrt(grad_sum_sq);
    }
    for (std::size_t i = 0; i < n_sa; ++i) {
      w[i] = std::clamp(w[i] - eta * grad[i], -1.0, 1.0);
    }
    report.l1_objective.push_back(l1);
    report.objective.push_back(l1);
    report.grad_norm.push_back(gnorm);
    report.step_size.push_back(eta);
  }
  for (double& v : mean_occ) v /= static_cast<double>(T);
  OccupancyMeasure mean{S, A, H, std::move(mean_occ)};
  Policy out = policy_from_occupancy(mean);
  occupancy_sparse(kernel, out, occ);
  report.achieved_l1 = l1_objective(occ, estimate.est);
  return {std::move(out), std::move(report)};
}

Policy vail_closed_form_standard_imitation(const Environment& env,
                                           const OccupancyEstimate& estimate,
                                           OptimumSelection selection, std::uint64_t seed) {
  check_standard_imitation(env.mdp);
  check_estimate_dims(env.mdp.model(), estimate);
  const int S = env.mdp.num_states, A = env.mdp.num_actions, H = env.mdp.horizon;
  Rng rng(seed);
  Policy policy{S, A, H, std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0), false};
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      double marginal = 0.0;
      for (int a = 0; a < A; ++a) marginal += estimate.at(h, s, a);
      const double rho = env.mdp.initial[s];
      if (marginal > 0.0 && rho == 0.0) {
        throw std::invalid_argument("closed form requires rho(s) > 0 wherever the estimated "
                                    "marginal is positive (s=" + std::to_string(s) + ")");
      }
      double expert_prob = 1.0;
      if (A > 1 && rho > 0.0 && marginal < rho) {
        const double lo = marginal / rho;
        switch (selection) {
          case OptimumSelection::worst: expert_prob = lo; break;
          case OptimumSelection::best: expert_prob = 1.0; break;
          case OptimumSelection::uniform: expert_prob = lo + rng.uniform() * (1.0 - lo); break;
        }
      }
      policy.at(h, s, 0) = expert_prob;
      for (int a = 1; a < A; ++a) policy.at(h, s, a) = (1.0 - expert_prob) / (A - 1);
    }
  }
  return policy;
}

std::pair<Policy, SolveReport> fem_solve(const TransitionModel& model,
                                         const OccupancyEstimate& estimate, int iterations) {
  if (iterations < 1) throw std::invalid_argument("fem_solve: T must be >= 1");
  check_estimate_dims(model, estimate);
  const int S = model.num_states, A = model.num_actions, H = model.horizon;
  const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;
  const SparseKernel kernel = SparseKernel::build(model);

  std::vector<double> mix;
  occupancy_sparse(kernel, Policy::uniform(S, A, H), mix);

  SolveReport report;
  std::vector<double> direction(n_sa, 0.0);
  std::vector<double> vertex;
  for (int t = 0; t < iterations; ++t) {
    double grad_norm_sq = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n_sa; ++i) {
      direction[i] = estimate.est[i] - mix[i];
      grad_norm_sq += direction[i] * direction[i];
      scale = std::max(scale, std::abs(direction[i]));
    }
    double gamma = 0.0;
    if (scale > 0.0) {
      // Rescaling keeps the value-iteration reward inside [-1, 1] and does
      // not change the argmax.
      std::vector<double> reward(n_sa);
      for (std::size_t i = 0; i < n_sa; ++i) reward[i] = direction[i] / scale;
      auto [pi, value] = vi_sparse(kernel, reward, TieRule::highest);
      (void)value;
      occupancy_sparse(kernel, pi, vertex);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < n_sa; ++i) {
        const double dv = vertex[i] - mix[i];
        num += direction[i] * dv;
        den += dv * dv;
      }
      if (den > 0.0) gamma = std::clamp(num / den, 0.0, 1.0);
      if (gamma > 0.0) {
        for (std::size_t i = 0; i < n_sa; ++i) mix[i] += gamma * (vertex[i] - mix[i]);
      }
    }
    double l1 = 0.0, l2_sq = 0.0;
    for (std::size_t i = 0; i < n_sa; ++i) {
      const double d = mix[i] - estimate.est[i];
      l1 += std::abs(d);
      l2_sq += d * d;
    }
    report.l1_objective.push_back(l1);
    report.objective.push_back(0.5 * l2_sq);
    report.grad_norm.push_back(std::sqrt(grad_norm_sq));
    report.step_size.push_back(gamma);
  }
  OccupancyMeasure mixed{S, A, H, std::move(mix)};
  Policy out = policy_from_occupancy(mixed);
  occupancy_sparse(kernel, out, vertex);
  report.achieved_l1 = l1_objective(vertex, estimate.est);
  return {std::move(out), std::move(report)};
}

std::pair<Policy, SolveReport> gtal_solve(const TransitionModel& model,
                                          const OccupancyEstimate& estimate, int iterations) {
  if (iterations < 1) throw std::invalid_argument("gtal_solve: T must be >= 1");
  check_estimate_dims(model, estimate);
  const int S = model.num_states, A = model.num_actions, H = model.horizon;
  const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;
  const SparseKernel kernel = SparseKernel::build(model);

  // Weights over the 2 H S A signed coordinates of the l_inf dual.
  std::vector<double> weight(2 * n_sa, 1.0 / static_cast<double>(2 * n_sa));
  const double eta =
      std::sqrt(8.0 * std::log(static_cast<double>(2 * n_sa)) / static_cast<double>(iterations));

  SolveReport report;
  std::vector<double> reward(n_sa, 0.0);
  std::vector<double> occ;
  std::vector<double> mean_occ(n_sa, 0.0);
  for (int t = 0; t < iterations; ++t) {
    for (std::size_t i = 0; i < n_sa; ++i) reward[i] = weight[i] - weight[n_sa + i];
    // Best response of the policy player: minimize <w, P^pi>.
    std::vector<double> neg(n_sa);
    for (std::size_t i = 0; i < n_sa; ++i) neg[i] = -reward[i];
    auto [pi, value] = vi_sparse(kernel, neg, TieRule::highest);
    (void)value;
    occupancy_sparse(kernel, pi, occ);
    double game_value = 0.0;
    double l1 = 0.0, norm_sq = 0.0;
    for (std::size_t i = 0; i < n_sa; ++i) {
      const double diff = occ[i] - estimate.est[i];
      game_value += reward[i] * diff;
      l1 += std::abs(diff);
      norm_sq += diff * diff;
      mean_occ[i] += occ[i];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n_sa; ++i) {
      const double diff = occ[i] - estimate.est[i];
      weight[i] *= std::exp(eta * diff);
      weight[n_sa + i] *= std::exp(-eta * diff);
    }
    for (double wv : weight) total += wv;
    for (double& wv : weight) wv /= total;
    report.l1_objective.push_back(l1);
    report.objective.push_back(game_value);
    report.grad_norm.push_back(std::sqrt(norm_sq));
    report.step_size.push_back(eta);
  }
  for (double& v : mean_occ) v /= static_cast<double>(iterations);
  OccupancyMeasure mean{S, A, H, std::move(mean_occ)};
  Policy out = policy_from_occupancy(mean);
  occupancy_sparse(kernel, out, occ);
  report.achieved_l1 = l1_objective(occ, estimate.est);
  return {std::move(out), std::move(report)};
}

double gail_discriminator(double learner_mass, double expert_mass) {
  const double denom = learner_mass + expert_mass;
  return denom == 0.0 ? 0.5 : learner_mass / denom;
}

std::pair<Policy, SolveReport> gail_solve(const TransitionModel& model,
                                          const OccupancyEstimate& estimate, int iterations,
                                          double eta) {
  if (iterations < 1) throw std::invalid_argument("gail_solve: T must be >= 1");
  if (eta <= 0.0) throw std::invalid_argument("gail_solve: eta must be positive");
  check_estimate_dims(model, estimate);
  const int S = model.num_states, A = model.num_actions, H = model.horizon;
  const std::size_t n_sa = static_cast<std::size_t>(H) * S * A;
  const SparseKernel kernel = SparseKernel::build(model);

  Policy pi = Policy::uniform(S, A, H);
  SolveReport report;
  std::vector<double> occ;
  std::vector<double> reward(n_sa, 0.0);
  std::vector<double> mean_occ(n_sa, 0.0);
  for (int t = 0; t < iterations; ++t) {
    occupancy_sparse(kernel, pi, occ);
    double l1 = 0.0, norm_sq = 0.0;
    for (std::size_t i = 0; i < n_sa; ++i) {
      const double diff = occ[i] - estimate.est[i];
      l1 += std::abs(diff);
      norm_sq += diff * diff;
      mean_occ[i] += occ[i];
      reward[i] = -std::log(std::max(gail_discriminator(occ[i], estimate.est[i]), 1e-12));
    }
    const std::vector<double> q = action_value(model, pi, reward);
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
              std::exp(eta * (q[(static_cast<std::size_t>(h) * S + s) * A + a] - qmax));
          pi.at(h, s, a) = next;
          total += next;
        }
        for (int a = 0; a < A; ++a) pi.at(h, s, a) /= total;
      }
    }
    report.l1_objective.push_back(l1);
    report.objective.push_back(l1);
    report.grad_norm.push_back(std::sqrt(norm_sq));
    report.step_size.push_back(eta);
  }
  for (double& v : mean_occ) v /= static_cast<double>(iterations);
  OccupancyMeasure mean{S, A, H, std::move(mean_occ)};
  Policy out = policy_from_occupancy(mean);
  occupancy_sparse(kernel, out, occ);
  report.achieved_l1 = l1_objective(occ, estimate.est);
  return {std::move(out), std::move(report)};
}

}  // namespace imbench
