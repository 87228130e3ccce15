#pragma once

#include <string>

#include "relest/scheduling.hpp"

namespace relest {

struct MdpSettings {
  int depth = 8;          // covariance basis {h^0(Pbar), ..., h^depth(Pbar)}
  int levels = 32;        // snap tolerance 1/levels (relative trace distance)
  int alpha_grid = 10;    // alpha_hat values {0, 1/(G-1), ..., 1}
  std::size_t state_cap = 20000;
  double rvi_tol = 1e-6;
  int rvi_max_iter = 10000;
};

/// One covariance grid point: convex-combination coefficients over the
/// h-iterate basis, plus the assembled matrix and its trace.
struct CovPoint {
  Vector coeffs;
  Matrix P;
  double trace = 0.0;
};

/// Action: a queue plus alpha_hat per queue position 0..n-2.
/// For n > 3 the queue is resolved per state by greedy_order and the stored
/// queue is empty.
struct MdpAction {
  Queue queue;
  std::vector<double> alpha_hats;
};

struct MdpModel {
  MdpSettings settings;
  int n = 0;
  std::vector<std::vector<CovPoint>> grids;     // per sensor
  std::vector<std::vector<int>> states;         // per-sensor grid indices
  std::vector<MdpAction> actions;
  std::vector<Queue> state_queue;               // resolved queues when n > 3
  std::vector<double> stage_cost;               // per state: sum of traces
  // transition rows: (successor state, probability), row per (state, action)
  std::vector<std::vector<std::vector<std::pair<int, double>>>> rows;

  std::size_t n_states() const { return states.size(); }
  std::size_t n_actions() const { return actions.size(); }
};

/// Breadth-first closure from (Pbar, ..., Pbar) under reset/h/t with the
/// alpha_hat grid, snapping per-sensor covariances within relative trace
/// tolerance 1/levels. Throws when the state cap is exceeded.
MdpModel build_mdp(const std::vector<CovMaps>& maps, const MdpSettings& settings);

struct MdpPolicy {
  MdpSettings settings;
  int n = 0;
  std::vector<std::vector<CovPoint>> grids;
  std::vector<std::vector<int>> states;
  std::vector<MdpAction> actions;
  std::vector<Queue> state_queue;       // resolved queues when n > 3
  std::vector<int> action_index;        // chosen action per state
  std::vector<double> relative_values;  // h(v), reference state 0
  double average_cost = 0.0;
  int iterations = 0;
  double span = 0.0;
  std::string system_fingerprint;
};

/// Relative value iteration (aperiodicity-transformed), fixed reference
/// state 0, stopping when the Bellman residual span < tol.
/// Throws on non-convergence.
MdpPolicy relative_value_iteration(const MdpModel& model, double tol,
                                   int max_iter);
MdpPolicy relative_value_iteration(const MdpModel& model);

/// Online lookup: snap current covariances to the nearest grid state by
/// summed trace distance (lower state index on ties) and return its action.
/// Returns alphas indexed by sensor.
std::pair<Queue, std::vector<double>> mdp_policy_step(
    const MdpPolicy& policy, const std::vector<Matrix>& current_P);

std::string system_fingerprint(const std::vector<CovMaps>& maps);

/// Versioned JSON persistence (format "relest-mdp-policy", version 1).
void save_policy(const MdpPolicy& policy, const std::string& path);
MdpPolicy load_policy(const std::string& path);

}  // namespace relest
