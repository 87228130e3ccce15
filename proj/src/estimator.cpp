#include "relest/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "relest/trigger.hpp"

namespace relest {

CovMaps::CovMaps(const LtiSystem& sys, const SteadyStateFilter& filter)
    : sys_(sys), p_bar_(filter.P_bar) {}

Matrix CovMaps::h(const Matrix& x) const {
  return symmetrize(sys_.A * x * sys_.A.transpose() + sys_.Q);
}

Matrix CovMaps::g(const Matrix& x, double alpha) const {
  double ah = alpha_hat_of(alpha);
  if (ah == 0.0) return Matrix::Zero(sys_.dim_x, sys_.dim_x);
  return symmetrize(ah * (sys_.A * x * sys_.A.transpose() + h(p_bar_) - p_bar_));
}

Matrix CovMaps::t(const Matrix& x, double alpha) const {
  double ah = alpha_hat_of(alpha);
  if (ah == 0.0) return p_bar_;
  if (ah == 1.0) return h(x);
  return symmetrize((1.0 - ah) * p_bar_ + ah * h(x));
}

Matrix CovMaps::sigma_pred(const Matrix& p_prev) const {
  Matrix sigma = symmetrize(h(p_prev) - p_bar_);
  double scale = std::max(1.0, sigma.norm());
  if (min_eigenvalue_sym(sigma) < -1e-8 * scale) {
    throw std::logic_error(
        "sigma_pred: h(P_prev) - P_bar is indefinite; P_prev is outside the "
        "reachable set");
  }
  return sigma;
}

Matrix covariance_update(const CovMaps& maps, const Matrix& p_prev, bool gamma,
                         bool mu, double alpha) {
  if (gamma && !mu) {
    throw std::logic_error(
        "covariance_update: gamma = 1 with mu = 0 is impossible (a sensor "
        "cannot transmit on a busy channel)");
  }
  if (gamma) return maps.P_bar();
  if (!mu) return maps.h(p_prev);
  return maps.t(p_prev, alpha);
}

RemoteEstimate remote_update(const CovMaps& maps, const RemoteEstimate& prev,
                             bool gamma, bool mu, double alpha,
                             const std::optional<Vector>& payload) {
  if (gamma != payload.has_value()) {
    throw std::invalid_argument(
        "remote_update: payload must be present iff gamma = 1");
  }
  RemoteEstimate next;
  next.k = prev.k + 1;
  next.P = covariance_update(maps, prev.P, gamma, mu, alpha);
  if (gamma) {
    next.x_hat = *payload;
    next.tau = 0;
  } else {
    next.x_hat = maps.system().A * prev.x_hat;
    next.tau = prev.tau + 1;
  }
  return next;
}

}  // namespace relest
