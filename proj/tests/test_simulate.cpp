#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "relest/config.hpp"
#include "relest/io.hpp"
#include "relest/simulate.hpp"
#include "test_helpers.hpp"

using namespace relest;
using namespace relest::testing;

namespace {

SimContext example_context() {
  return SimContext::create(
      SystemSet::create({example_system_1(), example_system_2()}));
}

bool bitwise_equal(const EpisodeResult& a, const EpisodeResult& b) {
  return a.trace_P == b.trace_P && a.sq_error == b.sq_error &&
         a.error == b.error && a.transmitter == b.transmitter &&
         a.eta == b.eta && a.mu == b.mu && a.gamma == b.gamma &&
         a.episode_cost == b.episode_cost;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("same seed gives bitwise-identical episodes") {
  SimContext ctx = example_context();
  for (const SchedulePolicy& policy :
       {SchedulePolicy(GreedyPolicy{}), SchedulePolicy(PeriodicPolicy{{1, 0, 0}})}) {
    EpisodeResult a = run_episode(ctx, policy, 200, 12345, 7);
    EpisodeResult b = run_episode(ctx, policy, 200, 12345, 7);
    CHECK(bitwise_equal(a, b));
  }
  // and different seeds differ
  EpisodeResult a = run_episode(ctx, GreedyPolicy{}, 200, 12345, 7);
  EpisodeResult c = run_episode(ctx, GreedyPolicy{}, 200, 12346, 7);
  CHECK_FALSE(bitwise_equal(a, c));
}

TEST_CASE("a lone sensor transmits every slot and stays at P_bar") {
  SimContext ctx =
      SimContext::create(SystemSet::create({example_system_1()}));
  EpisodeResult r = run_episode(ctx, GreedyPolicy{}, 100, 5, 0);
  double tr = ctx.filters[0].P_bar.trace();
  for (long k = 0; k < r.T; ++k) {
    CHECK(r.transmitter[k] == 0);
    CHECK(r.at_trace(k, 0) == doctest::Approx(tr).epsilon(1e-12));
  }
}

TEST_CASE("periodic schedule reproduces the deterministic cycle exactly") {
  SimContext ctx = example_context();
  PeriodicPolicy table{{1, 0, 0}};
  PeriodicCycle cyc = periodic_cycle_cost(ctx, table);

  EpisodeResult r = run_episode(ctx, table, 999, 999, 3);
  for (long k = 0; k < r.T; ++k) {
    for (int i = 0; i < 2; ++i) {
      CHECK(r.at_trace(k, i) ==
            doctest::Approx(cyc.traces[k % 3][i]).epsilon(1e-12));
    }
  }
  CHECK(r.episode_cost == doctest::Approx(cyc.average_cost).epsilon(1e-12));

  // the scheduled sensor always transmits (deterministic embedding)
  for (long k = 0; k < r.T; ++k) {
    CHECK(r.transmitter[k] == table.table[k % 3]);
  }
}

TEST_CASE("mixed state dimensions simulate cleanly") {
  // a 2-D process next to a scalar one: exercises the per-sensor offsets
  SimContext ctx = SimContext::create(
      SystemSet::create({example_system_1(), scalar_system(1.4, 2.0, 1.0)}));
  EpisodeResult r = run_episode(ctx, GreedyPolicy{}, 150, 77, 1);
  CHECK(r.dim_offset == std::vector<int>{0, 2, 3});
  CHECK(r.error.size() == static_cast<std::size_t>(150 * 3));
  for (long k = 0; k < r.T; ++k) {
    for (int i = 0; i < 2; ++i) {
      CHECK(std::isfinite(r.at_trace(k, i)));
      // sq_error equals the squared norm of the stored error slice
      int d = i == 0 ? 2 : 1;
      double sq = 0.0;
      for (int c = 0; c < d; ++c) {
        double e = r.error[k * 3 + r.dim_offset[i] + c];
        sq += e * e;
      }
      CHECK(sq == doctest::Approx(r.sq_error[k * 2 + i]).epsilon(1e-12));
    }
  }
  EpisodeResult again = run_episode(ctx, GreedyPolicy{}, 150, 77, 1);
  CHECK(bitwise_equal(r, again));
}

TEST_CASE("monte carlo summary bookkeeping") {
  SimContext ctx = example_context();
  MonteCarloSummary one = monte_carlo_cost(ctx, GreedyPolicy{}, 50, 1, 11);
  CHECK(one.single_sample);
  CHECK(one.std_error == 0.0);

  MonteCarloSummary s = monte_carlo_cost(ctx, PeriodicPolicy{{1, 0, 0}}, 99, 4, 11);
  CHECK_FALSE(s.single_sample);
  CHECK(s.std_error == doctest::Approx(0.0).epsilon(1e-12));  // deterministic
  CHECK(s.per_sensor_J.size() == 2);
  CHECK(s.mean_J ==
        doctest::Approx(s.per_sensor_J[0] + s.per_sensor_J[1]).epsilon(1e-9));
}

TEST_CASE("greedy beats the offline table on the example pair") {
  SimContext ctx = example_context();
  double j_off = periodic_cycle_cost(ctx, PeriodicPolicy{{1, 0, 0}}).average_cost;
  MonteCarloSummary s = monte_carlo_cost(ctx, GreedyPolicy{}, 600, 30, 321);
  CHECK(s.mean_J + 3.0 * s.std_error < j_off);
}

TEST_CASE("sampled squared error tracks the predicted covariance on average") {
  SimContext ctx = example_context();
  MonteCarloSummary s = monte_carlo_cost(ctx, GreedyPolicy{}, 300, 60, 2025);
  CHECK(std::abs(s.mean_sq_error_J - s.mean_J) <= 0.05 * s.mean_J);
}

TEST_CASE("config round trip with overridable fields") {
  const char* path = "harness_config_test.json";
  {
    std::ofstream out(path);
    out << R"({
      "systems": [
        {"A": [[2.0,1.0],[0.0,1.0]], "C": [[1.0,2.0]],
         "Q": [[1.0,0.0],[0.0,1.0]], "R": [[1.0]]},
        {"A": [[1.1,1.0],[0.0,1.0]], "C": [[1.0,1.0]],
         "Q": [[3.0,0.0],[0.0,3.0]], "R": [[1.0]]}
      ],
      "scheduler": {"type": "offline", "table": [2, 1, 1]},
      "horizon": 42, "runs": 7, "seed": 99,
      "mdp": {"depth": 5, "levels": 8}
    })";
  }
  ExperimentConfig cfg = load_config(path);
  std::remove(path);
  CHECK(cfg.systems.n() == 2);
  CHECK((cfg.systems.systems[0].Pi0 - cfg.systems.systems[0].Q).norm() ==
        0.0);  // Pi0 defaults to Q
  CHECK(cfg.scheduler.kind == SchedulerKind::Offline);
  CHECK(cfg.scheduler.periodic_table == std::vector<int>{1, 0, 0});  // 0-based
  CHECK(cfg.horizon == 42);
  CHECK(cfg.runs == 7);
  CHECK(cfg.seed == 99);
  CHECK(cfg.mdp.depth == 5);
  CHECK(cfg.mdp.levels == 8);
  CHECK(cfg.ell_max == 20);  // default
}

TEST_CASE("config errors carry the offending field path") {
  const char* path = "harness_config_bad.json";
  auto write_and_load = [&](const std::string& body) -> std::string {
    {
      std::ofstream out(path);
      out << body;
    }
    try {
      load_config(path);
    } catch (const ConfigError& e) {
      std::remove(path);
      return e.what();
    }
    std::remove(path);
    return "";
  };

  std::string msg = write_and_load(R"({"systems": []})");
  CHECK(msg.find("systems") != std::string::npos);

  msg = write_and_load(R"({"systems": [{"A": [[1.0]], "C": [[1.0]],
    "Q": [[1.0]]}]})");
  CHECK(msg.find("systems[0].R") != std::string::npos);

  msg = write_and_load(R"({"systems": [{"A": [[2.0]], "C": [[1.0]],
    "Q": [[1.0]], "R": [[1.0]]}],
    "scheduler": {"type": "offline", "table": [3]}})");
  CHECK(msg.find("scheduler.table[0]") != std::string::npos);

  msg = write_and_load("{not json");
  CHECK(msg.find("parse") != std::string::npos);
}

TEST_CASE("trace CSV has the documented schema") {
  SimContext ctx = example_context();
  EpisodeResult ep = run_episode(ctx, GreedyPolicy{}, 10, 1, 0);
  const char* path = "harness_csv_test.csv";
  {
    TraceCsvWriter w(path);
    w.write_episode(ep);
  }
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "episode,step,sensor,transmitter,gamma,mu,eta,trace_P,sq_error");
  long rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  in.close();
  std::remove(path);
  CHECK(rows == ep.T * ep.n);
}

}  // TEST_SUITE
