#pragma once

#include "relest/estimator.hpp"
#include "relest/scheduling.hpp"

namespace relest {

/// Holding covariances P^0 = Pbar, P^j = t(P^{j-1}, alpha^{j-1}) with
/// alpha_hat^{j-1} = (beta^{j-1})^(2/r(j-1)), r the rank of the
/// predicted-innovation covariance at that depth.
struct HoldingCovariances {
  std::vector<Matrix> P;  // size betas.size() + 1
};

HoldingCovariances holding_covariances(const CovMaps& maps,
                                       const std::vector<double>& betas);

/// Closed-form evaluation of P^j (cross-check for the recursion).
Matrix holding_covariance_closed_form(const CovMaps& maps,
                                      const std::vector<double>& betas, int j);

struct PerSensorSolution {
  std::vector<double> betas;  // size ell_max, last forced to 0
  double cost = 0.0;          // J_i at rate rho
};

struct LowerBoundSettings {
  int restarts = 3;
  std::uint64_t restart_seed = 0xB0DULL;
  double golden_tol = 1e-6;
  double cost_tol = 1e-9;
  int max_sweeps = 200;
};

/// Minimize rho*(Tr P^0 + sum_j w_j Tr P^{j+1}) over beta in [0,1]^ell_max,
/// w_j = prod_{l<=j} beta^l, subject to rho*(1 + sum_j w_j) = 1 and
/// beta^{ell_max-1} = 0 (guaranteed transmission at the truncation depth).
/// Throws std::invalid_argument when rho < 1/ell_max (infeasible; a larger
/// ell_max is needed).
PerSensorSolution per_sensor_subproblem(const CovMaps& maps, double rho,
                                        int ell_max,
                                        const LowerBoundSettings& settings = {});

struct LowerBoundSolution {
  std::vector<double> pi0;                  // per-sensor rates
  std::vector<std::vector<double>> betas;   // per-sensor trigger sequences
  std::vector<double> sensor_cost;          // J_i
  double total_cost = 0.0;                  // the lower bound
  int ell_max = 0;
};

/// Outer search over rate allocations on the simplex (sum rho = 1 face;
/// uniform grid per coordinate for n <= 3, coordinate descent above),
/// each point solved by per_sensor_subproblem.
LowerBoundSolution lower_bound(const std::vector<CovMaps>& maps, int ell_max,
                               int rate_grid_size,
                               const LowerBoundSettings& settings = {});

/// Remark-2 static queue: sensors sorted by pi0 ascending, ties by index.
Queue queue_heuristic_from_rates(const LowerBoundSolution& solution);

}  // namespace relest
