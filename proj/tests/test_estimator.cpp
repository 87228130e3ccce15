#include <doctest.h>

#include "relest/estimator.hpp"
#include "relest/trigger.hpp"
#include "relest/rng.hpp"
#include "test_helpers.hpp"

using namespace relest;
using namespace relest::testing;

namespace {

CovMaps make_maps(const LtiSystem& sys) { return CovMaps(sys, solve_dare(sys)); }

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("h map on the scalar system") {
  CovMaps maps = make_maps(scalar_system());
  double p = scalar_p_bar_oracle();

  CHECK(maps.h(Matrix::Identity(1, 1))(0, 0) == doctest::Approx(5.0));
  CHECK(maps.h(maps.P_bar())(0, 0) ==
        doctest::Approx(4.0 * p + 1.0).epsilon(1e-9));

  CovMaps maps0 = make_maps(scalar_system(0.0));
  CHECK(maps0.h(Matrix::Constant(1, 1, 7.0))(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("t map endpoints and midpoint") {
  CovMaps maps = make_maps(scalar_system());
  double p = scalar_p_bar_oracle();
  double hp = 4.0 * p + 1.0;

  CHECK(maps.t(maps.h(maps.P_bar()), 0.0)(0, 0) == doctest::Approx(p));
  CHECK(maps.t(maps.P_bar(), kInfAlpha)(0, 0) == doctest::Approx(hp).epsilon(1e-9));
  CHECK(maps.t(maps.P_bar(), 1.0)(0, 0) ==
        doctest::Approx(0.5 * (p + hp)).epsilon(1e-9));  // ~2.52254
}

TEST_CASE("g map endpoints and midpoint") {
  CovMaps maps = make_maps(scalar_system());
  double p = scalar_p_bar_oracle();
  double hp = 4.0 * p + 1.0;
  Matrix zero = Matrix::Zero(1, 1);

  CHECK(maps.g(maps.P_bar(), 0.0)(0, 0) == 0.0);
  CHECK(maps.g(zero, kInfAlpha)(0, 0) == doctest::Approx(hp - p).epsilon(1e-9));
  CHECK(maps.g(zero, 1.0)(0, 0) ==
        doctest::Approx(0.5 * (hp - p)).epsilon(1e-9));  // ~1.71353
}

TEST_CASE("predicted-innovation covariance") {
  CovMaps maps = make_maps(scalar_system());
  double p = scalar_p_bar_oracle();
  CHECK(maps.sigma_pred(maps.P_bar())(0, 0) ==
        doctest::Approx(3.0 * p + 1.0).epsilon(1e-9));  // 4p+1-p ~ 3.42705

  CovMaps m1 = make_maps(example_system_1());
  Matrix sigma = m1.sigma_pred(m1.P_bar());
  CHECK(is_psd(sigma, 1e-9));
  // right after a reception the innovation lives on a dim_y-dimensional
  // subspace; one step later it fills the state space (A has full rank)
  CHECK(numerical_rank(sigma) == 1);
  CHECK(numerical_rank(m1.sigma_pred(m1.h(m1.P_bar()))) == 2);
  CHECK(numerical_rank(m1.sigma_pred(m1.t(m1.h(m1.P_bar()), 2.0))) == 2);

  // far outside the reachable set the invariant trips
  CHECK_THROWS_AS(m1.sigma_pred(Matrix::Identity(2, 2) * -5.0), std::logic_error);
}

TEST_CASE("remote update branches") {
  LtiSystem sys = scalar_system();
  CovMaps maps = make_maps(sys);
  double p = scalar_p_bar_oracle();

  RemoteEstimate prev;
  prev.x_hat = Vector::Constant(1, 1.5);
  prev.P = maps.P_bar();
  prev.tau = 3;
  prev.k = 9;

  SUBCASE("reception resets to the payload and P_bar") {
    Vector v = Vector::Constant(1, 2.25);
    RemoteEstimate next = remote_update(maps, prev, true, true, 0.7, v);
    CHECK(next.x_hat(0) == 2.25);
    CHECK(next.P(0, 0) == doctest::Approx(p));
    CHECK(next.tau == 0);
    CHECK(next.k == 10);
  }

  SUBCASE("busy channel predicts with h") {
    RemoteEstimate next = remote_update(maps, prev, false, false, 0.7, {});
    CHECK(next.x_hat(0) == doctest::Approx(3.0));  // A x
    CHECK(next.P(0, 0) == doctest::Approx(4.0 * p + 1.0).epsilon(1e-9));
    CHECK(next.tau == 4);
  }

  SUBCASE("idle-and-hold with alpha = 0 collapses to P_bar") {
    RemoteEstimate next = remote_update(maps, prev, false, true, 0.0, {});
    CHECK(next.P(0, 0) == doctest::Approx(p));
    CHECK(next.x_hat(0) == doctest::Approx(3.0));
    CHECK(next.tau == 4);
  }

  SUBCASE("contract violations throw") {
    CHECK_THROWS_AS(
        remote_update(maps, prev, true, false, 0.0, Vector::Zero(1)),
        std::logic_error);
    CHECK_THROWS_AS(remote_update(maps, prev, true, true, 0.0, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        remote_update(maps, prev, false, true, 0.0, Vector::Zero(1)),
        std::invalid_argument);
  }
}

TEST_CASE("h-iterates grow strictly in trace from P_bar") {
  for (const LtiSystem& sys : {example_system_1(), example_system_2()}) {
    CovMaps maps = make_maps(sys);
    Matrix x = maps.P_bar();
    double prev = x.trace();
    Matrix hx = maps.h(x);
    CHECK(prev < hx.trace());  // strict first step
    for (int j = 0; j < 10; ++j) {
      x = maps.h(x);
      CHECK(x.trace() >= prev - 1e-12);
      prev = x.trace();
    }
  }
}

TEST_CASE("t is sandwiched between P_bar and h on the reachable set") {
  RngStream rng(stream_key(77, 0, 0, Purpose::ProcessNoise));
  for (const LtiSystem& sys : {example_system_1(), example_system_2()}) {
    CovMaps maps = make_maps(sys);
    for (int trial = 0; trial < 40; ++trial) {
      Matrix x = random_reachable_cov(maps, rng);
      for (double alpha : {0.0, 0.5, 1.0, 10.0, kInfAlpha}) {
        Matrix t = maps.t(x, alpha);
        Matrix h = maps.h(x);
        double scale = std::max(1.0, h.norm());
        CHECK(min_eigenvalue_sym(t - maps.P_bar()) >= -1e-10 * scale);
        CHECK(min_eigenvalue_sym(h - t) >= -1e-10 * scale);
      }
    }
  }
}

}  // TEST_SUITE
