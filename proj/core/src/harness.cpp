#include "imbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "imbench/estimators.hpp"
#include "imbench/exploration.hpp"
#include "imbench/rng.hpp"
#include "imbench/trajectory.hpp"

namespace imbench {

std::string to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::bc: return "bc";
    case Algorithm::vail: return "vail";
    case Algorithm::tail: return "tail";
    case Algorithm::mimic_md_exact: return "mimic_md_exact";
    case Algorithm::fem: return "fem";
    case Algorithm::gtal: return "gtal";
    case Algorithm::gail: return "gail";
    case Algorithm::oal: return "oal";
    case Algorithm::mb_tail: return "mb_tail";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (Algorithm alg : {Algorithm::bc, Algorithm::vail, Algorithm::tail,
                        Algorithm::mimic_md_exact, Algorithm::fem, Algorithm::gtal,
                        Algorithm::gail, Algorithm::oal, Algorithm::mb_tail}) {
    if (to_string(alg) == name) return alg;
  }
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::horizon: return "horizon";
    case SweepAxis::expert_m: return "expert_m";
    case SweepAxis::interactions: return "interactions";
  }
  return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  for (SweepAxis axis : {SweepAxis::horizon, SweepAxis::expert_m, SweepAxis::interactions}) {
    if (to_string(axis) == name) return axis;
  }
  throw std::invalid_argument("unknown sweep axis: " + name);
}

void ExperimentConfig::validate() const {
  if (values.empty()) throw std::invalid_argument("config: sweep values are empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= 0) throw std::invalid_argument("config: sweep values must be positive");
    if (i > 0 && values[i] <= values[i - 1]) {
      throw std::invalid_argument("config: sweep values must be strictly increasing");
    }
  }
  if (seeds < 1) throw std::invalid_argument("config: seeds must be >= 1");
  if (env.num_states < 1 || env.num_actions < 1) {
    throw std::invalid_argument("config: environment needs S >= 1 and A >= 1");
  }
  if (sweep != SweepAxis::horizon && env.horizon < 1) {
    throw std::invalid_argument("config: environment needs H >= 1");
  }
  if (sweep == SweepAxis::interactions && algorithm != Algorithm::oal &&
      algorithm != Algorithm::mb_tail && algorithm != Algorithm::bc) {
    throw std::invalid_argument(
        "config: the interactions axis applies to oal, mb_tail, or the bc baseline");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<long long> parse_values(const std::string& text) {
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream fields(cleaned);
  std::vector<long long> values;
  long long v = 0;
  while (fields >> v) values.push_back(v);
  return values;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key == "family") config.env.family = env_family_from_string(value);
    else if (key == "S") config.env.num_states = std::stoi(value);
    else if (key == "A") config.env.num_actions = std::stoi(value);
    else if (key == "H") config.env.horizon = std::stoi(value);
    else if (key == "m_param") config.env.m_param = std::stoll(value);
    else if (key == "rho") {
      std::istringstream fields(value);
      std::vector<double> rho;
      double x = 0.0;
      while (fields >> x) rho.push_back(x);
      config.env.rho = std::move(rho);
    } else if (key == "env") {
      config.env = parse_environment_spec_file(value);
    } else if (key == "alg") config.algorithm = algorithm_from_string(value);
    else if (key == "sweep") config.sweep = sweep_axis_from_string(value);
    else if (key == "values") config.values = parse_values(value);
    else if (key == "m") config.expert_m = std::stoll(value);
    else if (key == "T") config.iterations = std::stoi(value);
    else if (key == "step_rule") {
      if (value == "fixed") config.step_rule = StepRule::fixed;
      else if (value == "adaptive") config.step_rule = StepRule::adaptive;
      else throw std::invalid_argument("config: unknown step_rule '" + value + "'");
    } else if (key == "selection") {
      if (value == "worst") config.selection = OptimumSelection::worst;
      else if (value == "best") config.selection = OptimumSelection::best;
      else if (value == "uniform") config.selection = OptimumSelection::uniform;
      else throw std::invalid_argument("config: unknown selection '" + value + "'");
    } else if (key == "eta") config.gail_eta = std::stod(value);
    else if (key == "n_prime") config.estimator_rollouts = std::stoll(value);
    else if (key == "n_explore") config.exploration_episodes = std::stoll(value);
    else if (key == "K") config.online_episodes = std::stoll(value);
    else if (key == "delta") config.delta = std::stod(value);
    else if (key == "seeds") config.seeds = std::stoi(value);
    else if (key == "seed") config.base_seed = std::stoull(value);
    else if (key == "out") config.out_path = value;
    else if (key == "threads") config.threads = std::stoi(value);
    else {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  key + "'");
    }
  }
  return config;
}

ExperimentConfig parse_experiment_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_experiment_config(in);
}

int default_iterations(EnvFamily family, SweepAxis axis, Algorithm alg, int horizon) {
  if (axis == SweepAxis::interactions) return 5000;
  if (family == EnvFamily::standard_imitation || family == EnvFamily::custom) {
    return axis == SweepAxis::horizon ? 500 : 8000;
  }
  // Reset Cliff
  if (axis == SweepAxis::horizon) {
    switch (alg) {
      case Algorithm::fem: return 300;
      case Algorithm::tail: return horizon;
      default: return 4 * horizon;
    }
  }
  return 20000;
}

namespace {

struct Cell {
  std::size_t value_index = 0;
  int seed_index = 0;
};

struct CellOutput {
  ResultRow row;
};

double l1_error_vs_truth(const OccupancyEstimate& est, const OccupancyMeasure& truth) {
  return estimation_error_l1(est, truth);
}

ResultRow run_cell(const ExperimentConfig& config, const Environment& env, long long m,
                   long long sweep_value, int seed_index) {
  const auto start = std::chrono::steady_clock::now();
  ResultRow row;
  row.env = to_string(config.env.family);
  row.alg = to_string(config.algorithm);
  row.sweep_param = to_string(config.sweep);
  row.sweep_value = sweep_value;
  row.seed = seed_index;
  row.m = m;
  row.n = 0;

  const std::uint64_t cell_seed =
      derive_seed(config.base_seed,
                  (static_cast<std::uint64_t>(sweep_value) << 20) ^
                      static_cast<std::uint64_t>(seed_index));
  try {
    const int H = env.mdp.horizon;
    const OccupancyMeasure expert_occ = occupancy(env.mdp, env.expert);
    double expert_value = 0.0;
    for (std::size_t i = 0; i < expert_occ.dist.size(); ++i) {
      expert_value += expert_occ.dist[i] * env.mdp.reward[i];
    }
    row.expert_value = expert_value;

    const TrajectoryDataset data = sample_trajectories(
        env.mdp, env.expert, static_cast<std::size_t>(m), derive_seed(cell_seed, 1));

    const int T = config.iterations > 0
                      ? config.iterations
                      : default_iterations(config.env.family, config.sweep, config.algorithm, H);
    SaddleConfig saddle{T, config.step_rule, 0.0, {}};

    Policy learned = Policy::uniform(env.mdp.num_states, env.mdp.num_actions, H);
    std::optional<OccupancyEstimate> audit_estimate;
    double audit_slack = 0.0;

    switch (config.algorithm) {
      case Algorithm::bc: {
        learned = bc_fit(data, env.mdp.num_actions).policy;
        break;
      }
      case Algorithm::vail: {
        const OccupancyEstimate est = mle_estimate(data);
        auto [policy, report] = ogd_saddle_solve(env.mdp.model(), est, saddle);
        learned = std::move(policy);
        audit_estimate = est;
        audit_slack = saddle_slack(env.mdp.model(), saddle);
        break;
      }
      case Algorithm::tail: {
        const DatasetSplit split = split_dataset(data, derive_seed(cell_seed, 2));
        const OccupancyEstimate est = mimic_md_estimate(env.mdp, split);
        auto [policy, report] = ogd_saddle_solve(env.mdp.model(), est, saddle);
        learned = std::move(policy);
        audit_estimate = est;
        audit_slack = saddle_slack(env.mdp.model(), saddle);
        break;
      }
      case Algorithm::mimic_md_exact: {
        const DatasetSplit split = split_dataset(data, derive_seed(cell_seed, 2));
        const OccupancyEstimate est = mimic_md_estimate(env.mdp, split);
        learned = vail_closed_form_standard_imitation(env, est, config.selection,
                                                      derive_seed(cell_seed, 3));
        audit_estimate = est;
        audit_slack = 0.0;
        break;
      }
      case Algorithm::fem: {
        const OccupancyEstimate est = mle_estimate(data);
        auto [policy, report] = fem_solve(env.mdp.model(), est, T);
        learned = std::move(policy);
        break;
      }
      case Algorithm::gtal: {
        const OccupancyEstimate est = mle_estimate(data);
        auto [policy, report] = gtal_solve(env.mdp.model(), est, T);
        learned = std::move(policy);
        break;
      }
      case Algorithm::gail: {
        const OccupancyEstimate est = mle_estimate(data);
        auto [policy, report] = gail_solve(env.mdp.model(), est, T, config.gail_eta);
        learned = std::move(policy);
        break;
      }
      case Algorithm::oal: {
        const long long K = config.sweep == SweepAxis::interactions ? sweep_value
                                                                    : config.online_episodes;
        learned = oal_solve(env, data, K, config.delta, OalStepSizes{},
                            derive_seed(cell_seed, 2));
        row.n = K;
        break;
      }
      case Algorithm::mb_tail: {
        InteractionBudget budget;
        budget.expert_m = m;
        if (config.sweep == SweepAxis::interactions) {
          budget.estimator_rollouts = sweep_value / 2;
          budget.exploration_episodes = sweep_value - sweep_value / 2;
        } else {
          budget.estimator_rollouts = config.estimator_rollouts;
          budget.exploration_episodes = config.exploration_episodes;
        }
        learned = mb_tail(env, data, budget, saddle, derive_seed(cell_seed, 2), config.delta);
        row.n = budget.estimator_rollouts + budget.exploration_episodes;
        break;
      }
    }

    double value = 0.0;
    {
      const OccupancyMeasure occ = occupancy(env.mdp, learned);
      for (std::size_t i = 0; i < occ.dist.size(); ++i) value += occ.dist[i] * env.mdp.reward[i];
    }
    double gap = expert_value - value;
    if (gap < 0.0 && gap >= -1e-9) gap = 0.0;  // floating-point of exact optima
    row.gap = gap;

    if (audit_estimate) {
      // Reduction bound: gap <= 2 * estimation error + optimization slack.
      const double err = l1_error_vs_truth(*audit_estimate, expert_occ);
      const double bound = 2.0 * err + audit_slack + 1e-6;
      if (gap > bound) {
        throw std::runtime_error("reduction bound violated: gap " + std::to_string(gap) +
                                 " > " + std::to_string(bound));
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.gap = std::numeric_limits<double>::quiet_NaN();
  }
  const auto stop = std::chrono::steady_clock::now();
  row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return row;
}

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::size_t n_values = config.values.size();
  const std::size_t n_cells = n_values * static_cast<std::size_t>(config.seeds);

  // Environments are immutable and shared across the seeds of a sweep value.
  std::vector<Environment> envs;
  std::vector<long long> cell_m(n_values, 0);
  envs.reserve(n_values);
  for (std::size_t vi = 0; vi < n_values; ++vi) {
    EnvironmentSpec spec = config.env;
    long long m = config.expert_m;
    if (config.sweep == SweepAxis::horizon) spec.horizon = static_cast<int>(config.values[vi]);
    if (config.sweep == SweepAxis::expert_m) m = config.values[vi];
    if (spec.family == EnvFamily::reset_cliff && !spec.m_param) spec.m_param = m;
    envs.push_back(build_environment(spec));
    cell_m[vi] = m;
  }

  std::vector<ResultRow> rows(n_cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_cells) break;
      const std::size_t vi = i / config.seeds;
      const int seed_index = static_cast<int>(i % config.seeds);
      rows[i] = run_cell(config, envs[vi], cell_m[vi], config.values[vi], seed_index);
    }
  };
  int n_threads = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(n_cells)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return rows;
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> logs;
  logs.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (x <= 0.0) throw std::invalid_argument("loglog_slope: nonpositive x value");
    if (!(y > 0.0)) {
      std::cerr << "loglog_slope: dropping nonpositive gap at x=" << x << "\n";
      continue;
    }
    logs.emplace_back(std::log(x), std::log(y));
  }
  if (logs.size() < 2) {
    throw std::invalid_argument("loglog_slope: fewer than 2 positive points remain");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [lx, ly] : logs) {
    mx += lx;
    my += ly;
  }
  mx /= static_cast<double>(logs.size());
  my /= static_cast<double>(logs.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: degenerate x values");
  return sxy / sxx;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

ReportSummary emit_report(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "env,alg,sweep_param,sweep_value,seed,m,n,gap,expert_value\n";
  for (const ResultRow& row : rows) {
    out << row.env << ',' << row.alg << ',' << row.sweep_param << ',' << row.sweep_value << ','
        << row.seed << ',' << row.m << ',' << row.n << ',' << format_double(row.gap) << ','
        << format_double(row.expert_value) << '\n';
  }

  // Aggregate over seeds per (alg, sweep value), deterministic key order.
  std::vector<std::pair<std::string, long long>> keys;
  for (const ResultRow& row : rows) {
    if (row.error) continue;
    const std::pair<std::string, long long> key{row.alg, row.sweep_value};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());

  ReportSummary summary;
  for (const auto& [alg, value] : keys) {
    double sum = 0.0;
    int count = 0;
    for (const ResultRow& row : rows) {
      if (row.error || row.alg != alg || row.sweep_value != value) continue;
      sum += row.gap;
      ++count;
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (const ResultRow& row : rows) {
      if (row.error || row.alg != alg || row.sweep_value != value) continue;
      ss += (row.gap - mean) * (row.gap - mean);
    }
    const double stddev = count > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
    summary.aggregates.push_back(
        AggregateRow{alg, value, mean, stddev, stddev / std::sqrt(count), count});
  }
  for (const AggregateRow& agg : summary.aggregates) {
    out << "# aggregate," << agg.alg << ',' << agg.sweep_value << ','
        << format_double(agg.mean) << ',' << format_double(agg.stddev) << ','
        << format_double(agg.stddev_of_mean) << ',' << agg.count << '\n';
  }

  std::vector<std::string> algs;
  for (const AggregateRow& agg : summary.aggregates) {
    if (std::find(algs.begin(), algs.end(), agg.alg) == algs.end()) algs.push_back(agg.alg);
  }
  for (const std::string& alg : algs) {
    std::vector<std::pair<double, double>> points;
    for (const AggregateRow& agg : summary.aggregates) {
      if (agg.alg == alg) {
        points.emplace_back(static_cast<double>(agg.sweep_value), agg.mean);
      }
    }
    double slope = std::numeric_limits<double>::quiet_NaN();
    try {
      slope = loglog_slope(points);
    } catch (const std::exception& e) {
      std::cerr << "slope(" << alg << "): " << e.what() << "\n";
    }
    summary.slopes.push_back(SlopeRow{alg, slope});
    out << "# slope," << alg << ',' << format_double(slope) << '\n';
  }
  return summary;
}

ReportSummary emit_report(const std::vector<ResultRow>& rows, const std::string& out_path) {
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
  return emit_report(rows, out);
}

}  // namespace imbench
