#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "imbench/harness.hpp"
#include "test_util.hpp"

using namespace imbench;

namespace {

ExperimentConfig toy_config() {
  ExperimentConfig config;
  config.env.family = EnvFamily::reset_cliff;
  config.env.num_states = 3;
  config.env.num_actions = 2;
  config.env.horizon = 2;
  config.algorithm = Algorithm::bc;
  config.sweep = SweepAxis::expert_m;
  config.values = {4, 8};
  config.seeds = 3;
  config.iterations = 50;
  return config;
}

}  // namespace

TEST_CASE("config validation catches malformed sweeps") {
  ExperimentConfig config = toy_config();
  CHECK_NOTHROW(config.validate());

  ExperimentConfig decreasing = toy_config();
  decreasing.values = {8, 4};
  CHECK_THROWS_AS(decreasing.validate(), std::invalid_argument);

  ExperimentConfig nonpositive = toy_config();
  nonpositive.values = {0, 4};
  CHECK_THROWS_AS(nonpositive.validate(), std::invalid_argument);

  ExperimentConfig no_seeds = toy_config();
  no_seeds.seeds = 0;
  CHECK_THROWS_AS(no_seeds.validate(), std::invalid_argument);

  ExperimentConfig wrong_axis = toy_config();
  wrong_axis.algorithm = Algorithm::vail;
  wrong_axis.sweep = SweepAxis::interactions;
  CHECK_THROWS_AS(wrong_axis.validate(), std::invalid_argument);
}

TEST_CASE("config files parse key = value lines") {
  std::istringstream text(
      "family = standard_imitation\n"
      "S = 2\n"
      "A = 2\n"
      "H = 1\n"
      "alg = vail\n"
      "sweep = expert_m\n"
      "values = 10, 20, 40\n"
      "m = 300\n"
      "T = 100\n"
      "seeds = 2\n"
      "step_rule = fixed\n"
      "out = /tmp/report.csv\n");
  const ExperimentConfig config = parse_experiment_config(text);
  CHECK(config.env.num_states == 2);
  CHECK(config.algorithm == Algorithm::vail);
  CHECK(config.values == std::vector<long long>{10, 20, 40});
  CHECK(config.iterations == 100);
  CHECK(config.step_rule == StepRule::fixed);
  CHECK(config.out_path == "/tmp/report.csv");

  std::istringstream bad("what = 3\n");
  CHECK_THROWS_AS(parse_experiment_config(bad), std::invalid_argument);
}

TEST_CASE("run_sweep: bc with full coverage has zero gap everywhere") {
  ExperimentConfig config;
  config.env.family = EnvFamily::standard_imitation;
  config.env.num_states = 2;
  config.env.num_actions = 2;
  config.env.horizon = 2;
  config.algorithm = Algorithm::bc;
  config.sweep = SweepAxis::expert_m;
  config.values = {200, 400};
  config.seeds = 5;
  const std::vector<ResultRow> rows = run_sweep(config);
  CHECK(rows.size() == 10);
  for (const ResultRow& row : rows) {
    REQUIRE_FALSE(row.error.has_value());
    CHECK(row.gap == 0.0);  // 200 draws cover both states w.h.p.
    CHECK(row.expert_value == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("run_sweep: one value and one seed yields exactly one row") {
  ExperimentConfig config = toy_config();
  config.values = {6};
  config.seeds = 1;
  const std::vector<ResultRow> rows = run_sweep(config);
  CHECK(rows.size() == 1);
  CHECK(rows[0].sweep_value == 6);
  CHECK(rows[0].m == 6);
}

TEST_CASE("run_sweep records per-cell failures as error rows") {
  // mimic_md_exact demands a Standard Imitation instance; on the cliff each
  // cell fails but the sweep completes.
  ExperimentConfig config = toy_config();
  config.algorithm = Algorithm::mimic_md_exact;
  const std::vector<ResultRow> rows = run_sweep(config);
  CHECK(rows.size() == 6);
  for (const ResultRow& row : rows) {
    CHECK(row.error.has_value());
    CHECK(std::isnan(row.gap));
  }
}

TEST_CASE("run_sweep is deterministic and parallel-invariant") {
  ExperimentConfig config = toy_config();
  config.algorithm = Algorithm::vail;
  config.iterations = 200;
  config.threads = 1;
  const std::vector<ResultRow> serial = run_sweep(config);
  config.threads = 4;
  const std::vector<ResultRow> parallel = run_sweep(config);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].gap == parallel[i].gap);
    CHECK(serial[i].sweep_value == parallel[i].sweep_value);
    CHECK(serial[i].seed == parallel[i].seed);
  }

  std::ostringstream a, b;
  emit_report(serial, a);
  emit_report(parallel, b);
  CHECK(a.str() == b.str());
}

TEST_CASE("loglog_slope: linear, constant, noisy power law") {
  std::vector<std::pair<double, double>> linear;
  for (double x : {1.0, 2.0, 4.0, 8.0}) linear.emplace_back(x, 3.0 * x);
  CHECK(loglog_slope(linear) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<std::pair<double, double>> constant;
  for (double x : {1.0, 2.0, 4.0, 8.0}) constant.emplace_back(x, 0.7);
  CHECK(loglog_slope(constant) == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(515);
  std::vector<std::pair<double, double>> noisy;
  for (int i = 0; i < 10; ++i) {
    const double x = std::pow(10.0, 1.0 + 0.3 * i);
    const double u = (rng.uniform() * 2.0 - 1.0) * 0.05;
    noisy.emplace_back(x, 2.0 * std::pow(x, -0.5) * (1.0 + u));
  }
  CHECK(loglog_slope(noisy) == doctest::Approx(-0.5).epsilon(0.1));

  std::vector<std::pair<double, double>> dropped{{1.0, 0.0}, {2.0, 1.0}, {4.0, 0.5}};
  CHECK_NOTHROW(loglog_slope(dropped));
  std::vector<std::pair<double, double>> too_few{{1.0, 0.0}, {2.0, 1.0}};
  CHECK_THROWS_AS(loglog_slope(too_few), std::invalid_argument);
}

TEST_CASE("emit_report: row counts, aggregates, byte stability, empty input") {
  // 2 algs x 3 values x 20 seeds -> 120 data rows, 6 aggregates, 2 slopes.
  std::vector<ResultRow> rows;
  Rng rng(99);
  for (const char* alg : {"bc", "vail"}) {
    for (long long value : {10, 100, 1000}) {
      for (int seed = 0; seed < 20; ++seed) {
        ResultRow row;
        row.env = "standard_imitation";
        row.alg = alg;
        row.sweep_param = "expert_m";
        row.sweep_value = value;
        row.seed = seed;
        row.m = value;
        row.gap = (alg == std::string("bc") ? 2.0 : 1.0) / std::sqrt(static_cast<double>(value)) *
                  (0.9 + 0.2 * rng.uniform());
        row.expert_value = 2.0;
        rows.push_back(row);
      }
    }
  }
  std::ostringstream out;
  const ReportSummary summary = emit_report(rows, out);
  CHECK(summary.aggregates.size() == 6);
  CHECK(summary.slopes.size() == 2);
  const std::string text = out.str();
  int data_lines = 0, aggregate_lines = 0, slope_lines = 0;
  std::istringstream reader(text);
  std::string line;
  bool header = true;
  while (std::getline(reader, line)) {
    if (header) {
      CHECK(line == "env,alg,sweep_param,sweep_value,seed,m,n,gap,expert_value");
      header = false;
    } else if (line.rfind("# aggregate,", 0) == 0) {
      ++aggregate_lines;
    } else if (line.rfind("# slope,", 0) == 0) {
      ++slope_lines;
    } else {
      ++data_lines;
    }
  }
  CHECK(data_lines == 120);
  CHECK(aggregate_lines == 6);
  CHECK(slope_lines == 2);

  // Aggregate means equal the arithmetic mean of per-seed rows.
  for (const AggregateRow& agg : summary.aggregates) {
    double mean = 0.0;
    int count = 0;
    for (const ResultRow& row : rows) {
      if (row.alg == agg.alg && row.sweep_value == agg.sweep_value) {
        mean += row.gap;
        ++count;
      }
    }
    mean /= count;
    CHECK(agg.count == 20);
    CHECK(agg.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(agg.stddev_of_mean ==
          doctest::Approx(agg.stddev / std::sqrt(20.0)).epsilon(1e-12));
  }

  // Byte-for-byte stable on identical inputs.
  std::ostringstream again;
  emit_report(rows, again);
  CHECK(text == again.str());

  std::ostringstream empty;
  const ReportSummary none = emit_report({}, empty);
  CHECK(none.aggregates.empty());
  CHECK(none.slopes.empty());
  CHECK(empty.str() == "env,alg,sweep_param,sweep_value,seed,m,n,gap,expert_value\n");
}

TEST_CASE("default iteration budgets follow the protocol tables") {
  CHECK(default_iterations(EnvFamily::standard_imitation, SweepAxis::horizon, Algorithm::vail,
                           100) == 500);
  CHECK(default_iterations(EnvFamily::standard_imitation, SweepAxis::expert_m, Algorithm::gtal,
                           10) == 8000);
  CHECK(default_iterations(EnvFamily::reset_cliff, SweepAxis::horizon, Algorithm::vail, 30) ==
        120);
  CHECK(default_iterations(EnvFamily::reset_cliff, SweepAxis::horizon, Algorithm::tail, 30) ==
        30);
  CHECK(default_iterations(EnvFamily::reset_cliff, SweepAxis::horizon, Algorithm::fem, 30) ==
        300);
  CHECK(default_iterations(EnvFamily::reset_cliff, SweepAxis::expert_m, Algorithm::vail, 5) ==
        20000);
}

TEST_CASE("interactions sweeps drive the online algorithms") {
  ExperimentConfig config;
  config.env.family = EnvFamily::reset_cliff;
  config.env.num_states = 3;
  config.env.num_actions = 2;
  config.env.horizon = 2;
  config.sweep = SweepAxis::interactions;
  config.values = {50, 100};
  config.expert_m = 10;
  config.seeds = 2;
  config.iterations = 100;

  config.algorithm = Algorithm::oal;
  for (const ResultRow& row : run_sweep(config)) {
    REQUIRE_FALSE(row.error.has_value());
    CHECK(row.n == row.sweep_value);  // whole budget goes to online episodes
    CHECK(row.m == 10);
  }

  config.algorithm = Algorithm::mb_tail;
  for (const ResultRow& row : run_sweep(config)) {
    REQUIRE_FALSE(row.error.has_value());
    CHECK(row.n == row.sweep_value);  // estimator and exploration halves
  }
}

TEST_CASE("emit_report rejects unwritable paths") {
  CHECK_THROWS_AS(emit_report({}, "/nonexistent-dir/report.csv"), std::runtime_error);
}

TEST_CASE("reset cliff sweeps tie the initial distribution to the expert count") {
  ExperimentConfig config = toy_config();
  config.values = {4};
  config.seeds = 1;
  config.algorithm = Algorithm::bc;
  const std::vector<ResultRow> rows = run_sweep(config);
  REQUIRE(rows.size() == 1);
  // m_param = m = 4 gives rho = (0.2, 0.8, 0) and expert value H = 2.
  CHECK(rows[0].expert_value == doctest::Approx(2.0).epsilon(1e-12));
}
