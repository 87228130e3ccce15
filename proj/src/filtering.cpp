#include "relest/filtering.hpp"

namespace relest {

namespace {
constexpr int kMaxIterations = 10000;
constexpr double kStepTol = 1e-10;
constexpr double kDivergenceTrace = 1e12;
}  // namespace

SteadyStateFilter solve_dare(const LtiSystem& sys) {
  Matrix P = sys.Pi0.norm() > 0 ? sys.Pi0 : sys.Q;
  double prev_trace = P.trace();
  int monotone_growth = 0;

  for (int it = 1; it <= kMaxIterations; ++it) {
    Matrix M = sys.A * P * sys.A.transpose() + sys.Q;
    Matrix S = sys.C * M * sys.C.transpose() + sys.R;
    Matrix K = M * sys.C.transpose() * S.inverse();
    Matrix P_next = symmetrize(M - K * sys.C * M);

    double step = (P_next - P).norm();
    double tr = P_next.trace();
    monotone_growth = tr > prev_trace ? monotone_growth + 1 : 0;
    if (tr > kDivergenceTrace && monotone_growth > 2) {
      throw DetectabilityError(
          "Riccati iteration diverges (trace " + std::to_string(tr) +
          " after " + std::to_string(it) + " iterations)");
    }
    prev_trace = tr;
    P = P_next;

    if (step < kStepTol) {
      SteadyStateFilter f;
      f.P_bar = P;
      f.M_bar = symmetrize(sys.A * P * sys.A.transpose() + sys.Q);
      Matrix Sf = sys.C * f.M_bar * sys.C.transpose() + sys.R;
      f.K_bar = f.M_bar * sys.C.transpose() * Sf.inverse();
      f.iterations = it;
      f.residual = step;
      return f;
    }
  }
  throw DetectabilityError("Riccati iteration did not converge within " +
                           std::to_string(kMaxIterations) + " iterations");
}

LocalEstimate local_filter_step(const SteadyStateFilter& filter,
                                const LtiSystem& sys,
                                const LocalEstimate& prev, const Vector& y) {
  if (prev.x_hat.size() != sys.dim_x) {
    throw std::invalid_argument("local_filter_step: estimate dimension mismatch");
  }
  if (y.size() != sys.dim_y) {
    throw std::invalid_argument("local_filter_step: measurement dimension mismatch");
  }
  Vector pred = sys.A * prev.x_hat;
  LocalEstimate next;
  next.x_hat = pred + filter.K_bar * (y - sys.C * pred);
  next.k = prev.k + 1;
  return next;
}

}  // namespace relest
