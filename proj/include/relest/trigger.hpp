#pragma once

#include <limits>

#include "relest/linalg.hpp"
#include "relest/rng.hpp"

namespace relest {

/// alpha = infinity marks a sensor whose data is never important.
constexpr double kInfAlpha = std::numeric_limits<double>::infinity();

struct TriggerDecision {
  bool eta = false;
  double xi = 0.0;         // the auxiliary U(0,1) draw
  double phi_value = 1.0;  // phi(eps, alpha * Sigma)
};

/// alpha_hat = alpha / (1 + alpha) with infinity |-> 1;
/// beta = alpha_hat^(r/2) is the probability of eta = 0.
struct TriggerParams {
  double alpha = 0.0;
  double alpha_hat = 0.0;
  double beta = 0.0;
  int rank_r = 0;

  static TriggerParams from_alpha(double alpha, int rank_r);
  static TriggerParams from_alpha_hat(double alpha_hat, int rank_r);
};

/// alpha/(1+alpha), honoring alpha = infinity -> 1 exactly.
double alpha_hat_of(double alpha);
/// inverse of alpha_hat_of; alpha_hat = 1 -> infinity.
double alpha_of_hat(double alpha_hat);

/// phi(z, Pi) = exp(-1/2 z^T Pi^+ z); pseudo-inverse for singular Pi.
/// z outside range(Pi) returns 0 (an almost-surely-impossible event under
/// the model; the zero matrix therefore gives 1 at z = 0 and 0 elsewhere).
double phi(const Vector& z, const Matrix& pi);

/// Draw xi ~ U(0,1) and set eta = (xi > phi(eps, alpha * Sigma)).
/// alpha = 0 and alpha = infinity are honored exactly so that time-based
/// schedules embed deterministically.
TriggerDecision draw_eta(RngStream& rng, const Vector& eps, double alpha,
                         const Matrix& sigma);

/// P(eta = 1) = 1 - beta  (Gaussian eps with covariance Sigma of rank r).
double eta_probability(const TriggerParams& params);

}  // namespace relest
