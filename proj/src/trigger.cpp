#include "relest/trigger.hpp"

#include <cmath>
#include <stdexcept>

namespace relest {

double alpha_hat_of(double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (std::isinf(alpha)) return 1.0;
  return alpha / (1.0 + alpha);
}

double alpha_of_hat(double alpha_hat) {
  if (alpha_hat < 0.0 || alpha_hat > 1.0) {
    throw std::invalid_argument("alpha_hat must be in [0,1]");
  }
  if (alpha_hat >= 1.0) return std::numeric_limits<double>::infinity();
  return alpha_hat / (1.0 - alpha_hat);
}

TriggerParams TriggerParams::from_alpha(double alpha, int rank_r) {
  TriggerParams p;
  p.alpha = alpha;
  p.alpha_hat = alpha_hat_of(alpha);
  p.rank_r = rank_r;
  p.beta = rank_r == 0 ? 1.0 : std::pow(p.alpha_hat, 0.5 * rank_r);
  return p;
}

TriggerParams TriggerParams::from_alpha_hat(double alpha_hat, int rank_r) {
  TriggerParams p;
  p.alpha_hat = alpha_hat;
  p.alpha = alpha_of_hat(alpha_hat);
  p.rank_r = rank_r;
  p.beta = rank_r == 0 ? 1.0 : std::pow(alpha_hat, 0.5 * rank_r);
  return p;
}

double phi(const Vector& z, const Matrix& pi) {
  if (z.size() != pi.rows() || pi.rows() != pi.cols()) {
    throw std::invalid_argument("phi: dimension mismatch");
  }
  bool in_range = true;
  double quad = quadform_pinv(z, pi, &in_range);
  if (!in_range) return 0.0;
  return std::exp(-0.5 * quad);
}

TriggerDecision draw_eta(RngStream& rng, const Vector& eps, double alpha,
                         const Matrix& sigma) {
  if (alpha < 0.0) throw std::invalid_argument("draw_eta: alpha must be >= 0");
  TriggerDecision d;
  d.xi = rng.next_uniform();
  if (std::isinf(alpha)) {
    d.phi_value = 1.0;  // data never important
  } else {
    d.phi_value = phi(eps, alpha * sigma);
  }
  d.eta = d.xi > d.phi_value;
  return d;
}

double eta_probability(const TriggerParams& params) { return 1.0 - params.beta; }

}  // namespace relest
