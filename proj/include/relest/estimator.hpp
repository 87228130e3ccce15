#pragma once

#include <optional>

#include "relest/filtering.hpp"
#include "relest/model.hpp"

namespace relest {

/// Per-sensor remote estimator state at the fusion center.
/// tau counts slots since the last reception (0 exactly after gamma = 1).
struct RemoteEstimate {
  Vector x_hat;
  Matrix P;
  long tau = 0;
  long k = 0;
};

/// Covariance maps of one system around its steady filter:
///   h(X) = A X A^T + Q
///   g(X, a) = a/(1+a) (A X A^T + h(Pbar) - Pbar)
///   t(X, a) = 1/(1+a) Pbar + a/(1+a) h(X)
///   sigma_pred(P_prev) = h(P_prev) - Pbar
class CovMaps {
 public:
  CovMaps(const LtiSystem& sys, const SteadyStateFilter& filter);

  Matrix h(const Matrix& x) const;
  Matrix g(const Matrix& x, double alpha) const;
  Matrix t(const Matrix& x, double alpha) const;

  /// Predicted-innovation covariance; symmetrized, and verified PSD up to
  /// 1e-8 relative (reachable P_prev keeps it PSD; beyond that is an
  /// internal invariant violation).
  Matrix sigma_pred(const Matrix& p_prev) const;

  double trace_h(const Matrix& x) const { return h(x).trace(); }

  const Matrix& P_bar() const { return p_bar_; }
  const LtiSystem& system() const { return sys_; }

 private:
  LtiSystem sys_;
  Matrix p_bar_;
};

/// Covariance branch of the MMSE update; shared by remote_update and
/// the episode simulator.
///   gamma=1 -> Pbar; mu=0 -> h(P); mu=1, gamma=0 -> t(P, alpha)
Matrix covariance_update(const CovMaps& maps, const Matrix& p_prev, bool gamma,
                         bool mu, double alpha);

/// Full MMSE update. Payload must be present iff gamma = 1; gamma = 1 with
/// mu = 0 is impossible by construction and throws.
RemoteEstimate remote_update(const CovMaps& maps, const RemoteEstimate& prev,
                             bool gamma, bool mu, double alpha,
                             const std::optional<Vector>& payload);

}  // namespace relest
