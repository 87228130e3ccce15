#pragma once

#include <stdexcept>

#include "relest/model.hpp"

namespace relest {

/// Thrown when the Riccati iteration diverges (trace grows monotonically
/// past 1e12), i.e. (A, C) is not detectable in the operational sense.
class DetectabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Steady-state Kalman filter quantities:
///   M_bar = A P_bar A^T + Q   (prior covariance)
///   K_bar = M_bar C^T (C M_bar C^T + R)^-1
///   P_bar = M_bar - K_bar C M_bar
struct SteadyStateFilter {
  Matrix P_bar;
  Matrix M_bar;
  Matrix K_bar;
  int iterations = 0;
  double residual = 0.0;  // Frobenius norm of the last fixed-point step
};

struct LocalEstimate {
  Vector x_hat;
  long k = 0;
};

/// Fixed-point iteration of the Riccati map starting from Pi0 (fallback Q),
/// stopping when the successive Frobenius change drops below 1e-10 or after
/// 10,000 iterations. Throws DetectabilityError on monotone divergence.
SteadyStateFilter solve_dare(const LtiSystem& sys);

/// x <- A x_prev + K_bar (y - C A x_prev); steady gain at every step.
LocalEstimate local_filter_step(const SteadyStateFilter& filter,
                                const LtiSystem& sys,
                                const LocalEstimate& prev, const Vector& y);

}  // namespace relest
