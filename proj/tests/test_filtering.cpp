#include <doctest.h>

#include "relest/filtering.hpp"
#include "relest/rng.hpp"
#include "test_helpers.hpp"

using namespace relest;
using namespace relest::testing;

TEST_SUITE("filtering") {

TEST_CASE("scalar DARE matches the quadratic-equation oracle") {
  // fixed point of the scalar Riccati map satisfies 4 P^2 - 2 P - 1 = 0
  double p_oracle = scalar_p_bar_oracle();
  SteadyStateFilter f = solve_dare(scalar_system());
  CHECK(f.P_bar(0, 0) == doctest::Approx(p_oracle).epsilon(1e-9));
  CHECK(f.M_bar(0, 0) == doctest::Approx(4.0 * p_oracle + 1.0).epsilon(1e-9));
  double m = 4.0 * p_oracle + 1.0;
  CHECK(f.K_bar(0, 0) == doctest::Approx(m / (m + 1.0)).epsilon(1e-9));
}

TEST_CASE("A = 0 gives the one-step textbook covariances") {
  SteadyStateFilter f = solve_dare(scalar_system(0.0));
  CHECK(f.M_bar(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.P_bar(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("fixed-point residual of the solved filter is tiny") {
  for (const LtiSystem& sys : {example_system_1(), example_system_2()}) {
    SteadyStateFilter f = solve_dare(sys);
    Matrix M = sys.A * f.P_bar * sys.A.transpose() + sys.Q;
    Matrix S = sys.C * M * sys.C.transpose() + sys.R;
    Matrix K = M * sys.C.transpose() * S.inverse();
    Matrix P_next = symmetrize(M - K * sys.C * M);
    CHECK((P_next - f.P_bar).norm() <= 1e-8);
    // P_bar = M_bar - K_bar C M_bar
    Matrix rebuilt = f.M_bar - f.K_bar * sys.C * f.M_bar;
    CHECK((rebuilt - f.P_bar).norm() <= 1e-8);
  }
}

TEST_CASE("non-detectable system diverges") {
  LtiSystem sys = example_system_1();
  sys.C = Matrix::Zero(1, 2);
  CHECK_THROWS_AS(solve_dare(sys), DetectabilityError);
}

TEST_CASE("local filter step: scalar examples") {
  LtiSystem sys = scalar_system();
  SteadyStateFilter f = solve_dare(sys);
  double m = f.M_bar(0, 0);

  LocalEstimate prev{Vector::Zero(1), 0};
  Vector y(1);
  y << 1.0;
  LocalEstimate next = local_filter_step(f, sys, prev, y);
  CHECK(next.x_hat(0) == doctest::Approx(m / (m + 1.0)).epsilon(1e-9));
  CHECK(next.k == 1);

  // zero innovation leaves the prediction untouched
  LocalEstimate prev2{Vector::Constant(1, 3.0), 5};
  Vector y2 = sys.C * sys.A * prev2.x_hat;
  LocalEstimate next2 = local_filter_step(f, sys, prev2, y2);
  CHECK(next2.x_hat(0) == doctest::Approx(2.0 * 3.0));
  CHECK(next2.k == 6);

  LocalEstimate next3 = local_filter_step(f, sys, prev, Vector::Zero(1));
  CHECK(next3.x_hat(0) == 0.0);
}

TEST_CASE("local filter step checks dimensions") {
  LtiSystem sys = example_system_1();
  SteadyStateFilter f = solve_dare(sys);
  CHECK_THROWS_AS(
      local_filter_step(f, sys, LocalEstimate{Vector::Zero(3), 0}, Vector::Zero(1)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      local_filter_step(f, sys, LocalEstimate{Vector::Zero(2), 0}, Vector::Zero(2)),
      std::invalid_argument);
}

TEST_CASE("incremental innovation is zero-mean white with covariance h(P)-P") {
  // simulate the stationary filter-error recursions and check the
  // innovation statistics
  const LtiSystem sys = example_system_1();
  const SteadyStateFilter f = solve_dare(sys);
  const Matrix cov_delta =
      sys.A * f.P_bar * sys.A.transpose() + sys.Q - f.P_bar;  // h(P)-P

  const long N = 100000;
  RngStream w_rng(stream_key(2024, 0, 0, Purpose::ProcessNoise));
  RngStream v_rng(stream_key(2024, 0, 0, Purpose::MeasurementNoise));
  RngStream init(stream_key(2024, 0, 0, Purpose::InitLocalError));
  Matrix q_sqrt = psd_sqrt(sys.Q), r_sqrt = psd_sqrt(sys.R);
  Vector eps = init.gaussian_vector(psd_sqrt(f.P_bar));

  std::vector<Vector> deltas;
  deltas.reserve(N);
  for (long k = 0; k < N; ++k) {
    Vector w = w_rng.gaussian_vector(q_sqrt);
    Vector v = v_rng.gaussian_vector(r_sqrt);
    Vector pred = sys.A * eps + w;
    Vector delta = f.K_bar * (sys.C * pred + v);
    eps = pred - delta;
    deltas.push_back(delta);
  }

  Vector mean = Vector::Zero(2);
  for (const Vector& d : deltas) mean += d;
  mean /= static_cast<double>(N);
  for (int i = 0; i < 2; ++i) {
    double sigma = std::sqrt(cov_delta(i, i));
    CHECK(std::abs(mean(i)) <= 4.0 * sigma / std::sqrt(double(N)));
  }

  Matrix cov = Matrix::Zero(2, 2);
  for (const Vector& d : deltas) cov += (d - mean) * (d - mean).transpose();
  cov /= static_cast<double>(N - 1);
  CHECK((cov - cov_delta).norm() <= 0.05 * cov_delta.norm());

  // whiteness: correlations at lags 1..3 stay within 4/sqrt(N)
  for (int lag = 1; lag <= 3; ++lag) {
    Matrix cross = Matrix::Zero(2, 2);
    for (long k = lag; k < N; ++k) {
      cross += (deltas[k] - mean) * (deltas[k - lag] - mean).transpose();
    }
    cross /= static_cast<double>(N - lag);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        double corr = cross(a, b) / std::sqrt(cov(a, a) * cov(b, b));
        CHECK(std::abs(corr) <= 4.0 / std::sqrt(double(N)));
      }
    }
  }
}

}  // TEST_SUITE
