#include <doctest.h>

#include "relest/lowerbound.hpp"
#include "relest/trigger.hpp"
#include "test_helpers.hpp"

using namespace relest;
using namespace relest::testing;

namespace {

CovMaps make_maps(const LtiSystem& sys) { return CovMaps(sys, solve_dare(sys)); }

double subproblem_cost_at(const CovMaps& maps, double rho,
                          const std::vector<double>& betas) {
  HoldingCovariances hc = holding_covariances(maps, betas);
  double cost = maps.P_bar().trace();
  double w = 1.0;
  for (std::size_t j = 0; j < betas.size(); ++j) {
    w *= betas[j];
    if (w <= 0.0) break;
    cost += w * hc.P[j + 1].trace();
  }
  return rho * cost;
}

}  // namespace

TEST_SUITE("lowerbound") {

TEST_CASE("holding covariances: endpoint betas") {
  CovMaps maps = make_maps(example_system_1());

  // all beta = 1: pure h-iterates
  HoldingCovariances all_on = holding_covariances(maps, {1.0, 1.0, 1.0});
  Matrix x = maps.P_bar();
  for (int j = 0; j <= 3; ++j) {
    CHECK((all_on.P[j] - x).norm() <= 1e-9 * std::max(1.0, x.norm()));
    x = maps.h(x);
  }

  // beta^0 = 0: immediate guaranteed transmission keeps P at P_bar
  HoldingCovariances off = holding_covariances(maps, {0.0, 1.0});
  CHECK((off.P[1] - maps.P_bar()).norm() <= 1e-12);
}

TEST_CASE("holding covariance scalar arithmetic") {
  CovMaps maps = make_maps(scalar_system());
  double p = scalar_p_bar_oracle();
  double hp = 4.0 * p + 1.0;
  // r = 1, beta = 0.5 -> alpha_hat = 0.25
  HoldingCovariances hc = holding_covariances(maps, {0.5});
  CHECK(hc.P[1](0, 0) ==
        doctest::Approx(0.75 * p + 0.25 * hp).epsilon(1e-9));  // ~1.66578
}

TEST_CASE("recursion agrees with the closed form") {
  RngStream rng(stream_key(55, 0, 0, Purpose::TriggerXi));
  for (const LtiSystem& sys : {example_system_1(), example_system_2()}) {
    CovMaps maps = make_maps(sys);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> betas(10);
      for (double& b : betas) b = rng.next_uniform();
      HoldingCovariances rec = holding_covariances(maps, betas);
      for (int j = 0; j <= 10; ++j) {
        Matrix closed = holding_covariance_closed_form(maps, betas, j);
        CHECK((rec.P[j] - closed).norm() <= 1e-8 * std::max(1.0, closed.norm()));
      }
    }
  }
}

TEST_CASE("full-rate subproblem transmits always") {
  CovMaps maps = make_maps(example_system_1());
  PerSensorSolution s = per_sensor_subproblem(maps, 1.0, 8);
  CHECK(s.cost == doctest::Approx(maps.P_bar().trace()).epsilon(1e-9));
  for (double b : s.betas) CHECK(b == 0.0);
}

TEST_CASE("optimizer beats the deterministic period-2 point at rate 1/2") {
  CovMaps maps = make_maps(example_system_1());
  double period2 =
      0.5 * (maps.P_bar().trace() + maps.h(maps.P_bar()).trace());
  PerSensorSolution s = per_sensor_subproblem(maps, 0.5, 8);
  CHECK(s.cost <= period2 + 1e-9);
  // and the returned betas reproduce the reported cost
  CHECK(subproblem_cost_at(maps, 0.5, s.betas) ==
        doctest::Approx(s.cost).epsilon(1e-9));
}

TEST_CASE("subproblem matches a dense grid scan at ell_max = 3") {
  CovMaps maps = make_maps(scalar_system());
  const double rho = 0.4;
  const double S = 1.0 / rho - 1.0;
  PerSensorSolution sol = per_sensor_subproblem(maps, rho, 3);

  double best_grid = std::numeric_limits<double>::infinity();
  const int G = 50;
  for (int i = 0; i <= G; ++i) {
    for (int j = 0; j <= G; ++j) {
      double b0 = double(i) / G, b1 = double(j) / G;
      if (std::abs(b0 + b0 * b1 - S) > 1e-3) continue;
      best_grid =
          std::min(best_grid, subproblem_cost_at(maps, rho, {b0, b1, 0.0}));
    }
  }
  REQUIRE(best_grid < std::numeric_limits<double>::infinity());
  // grid points only satisfy the constraint within 1e-3, so allow slack
  CHECK(sol.cost <= best_grid + 1e-2);
}

TEST_CASE("infeasible rate reports the ell_max remedy") {
  CovMaps maps = make_maps(example_system_1());
  CHECK_THROWS_WITH_AS(per_sensor_subproblem(maps, 0.05, 4),
                       doctest::Contains("increase ell_max"),
                       std::invalid_argument);
}

TEST_CASE("subproblem cost is nonincreasing in the rate") {
  CovMaps maps = make_maps(example_system_2());
  double prev = std::numeric_limits<double>::infinity();
  for (double rho : {0.2, 0.3, 0.45, 0.6, 0.8, 1.0}) {
    double c = per_sensor_subproblem(maps, rho, 12).cost;
    CHECK(c <= prev + 1e-9);
    prev = c;
  }
}

TEST_CASE("single sensor lower bound is Tr P_bar at full rate") {
  std::vector<CovMaps> maps{make_maps(example_system_1())};
  LowerBoundSolution lb = lower_bound(maps, 8, 10);
  CHECK(lb.pi0 == std::vector<double>{1.0});
  CHECK(lb.total_cost ==
        doctest::Approx(maps[0].P_bar().trace()).epsilon(1e-9));
}

TEST_CASE("two-sensor lower bound satisfies its invariants") {
  std::vector<CovMaps> maps{make_maps(example_system_1()),
                            make_maps(example_system_2())};
  LowerBoundSolution lb = lower_bound(maps, 12, 50);

  double rate_sum = 0.0;
  for (std::size_t i = 0; i < lb.pi0.size(); ++i) {
    CHECK(lb.pi0[i] > 0.0);
    CHECK(lb.pi0[i] <= 1.0);
    rate_sum += lb.pi0[i];
    // recurrence constraint: pi0 (1 + sum_j prod betas) = 1
    double S = 0.0, w = 1.0;
    for (double b : lb.betas[i]) {
      w *= b;
      S += w;
    }
    CHECK(lb.pi0[i] * (1.0 + S) >= 1.0 - 1e-9);
    CHECK(lb.pi0[i] * (1.0 + S) <= 1.0 + 1e-6);
  }
  CHECK(rate_sum <= 1.0 + 1e-9);
  CHECK(lb.total_cost ==
        doctest::Approx(lb.sensor_cost[0] + lb.sensor_cost[1]).epsilon(1e-12));
}

TEST_CASE("deeper truncation never raises the bound") {
  std::vector<CovMaps> maps{make_maps(example_system_1()),
                            make_maps(example_system_2())};
  double lb10 = lower_bound(maps, 10, 50).total_cost;
  double lb20 = lower_bound(maps, 20, 50).total_cost;
  CHECK(lb20 <= lb10 + 1e-6);
}

TEST_CASE("rate queue heuristic sorts ascending with index ties") {
  LowerBoundSolution s;
  s.pi0 = {0.3, 0.7};
  CHECK(queue_heuristic_from_rates(s).order == std::vector<int>{0, 1});

  s.pi0 = {0.5, 0.5, 0.5};
  CHECK(queue_heuristic_from_rates(s).order == std::vector<int>{0, 1, 2});

  s.pi0 = {1.0};
  CHECK(queue_heuristic_from_rates(s).order == std::vector<int>{0});

  s.pi0 = {0.6, 0.1, 0.3};
  CHECK(queue_heuristic_from_rates(s).order == std::vector<int>{1, 2, 0});
}

}  // TEST_SUITE
