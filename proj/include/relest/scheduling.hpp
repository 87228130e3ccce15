#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "relest/estimator.hpp"
#include "relest/trigger.hpp"

namespace relest {


/// Channel-access priority order; order[0] listens first. 0-based sensor ids.
struct Queue {
  std::vector<int> order;

  int n() const { return static_cast<int>(order.size()); }
  bool is_permutation() const;
};

/// Per-slot record of (eta, mu, gamma) for every sensor. Exactly one gamma.
struct TransmissionOutcome {
  std::vector<std::uint8_t> eta;
  std::vector<std::uint8_t> mu;
  std::vector<std::uint8_t> gamma;
  int transmitter = -1;
};

/// Walk the queue: the first sensor with eta = 1 transmits; everyone after
/// the transmitter sees a busy channel (mu = 0); if none of the first n-1
/// fire, the last sensor transmits unconditionally.
/// eta_draws is indexed by sensor; the entry for the last queue position is
/// ignored (it may be -1/unknown).
TransmissionOutcome resolve_channel(const Queue& queue,
                                    const std::vector<int>& eta_draws);

/// Repeating transmitter table; entries are 0-based sensor indices.
struct PeriodicPolicy {
  std::vector<int> table;
};

struct GreedySettings {
  double alpha_hat_tol = 1e-6;  // golden-section tolerance per coordinate
  double cost_tol = 1e-9;       // sweep stopping criterion
  int restarts = 3;             // random restarts besides the 0.5 start
  std::uint64_t restart_seed = 0x5EEDULL;
  bool use_closed_form_n2 = true;  // last-pair closed form for two sensors
};

/// Scheduled sensor first in queue with alpha = 0; all others alpha = inf.
/// Returned alphas are indexed by sensor.
std::pair<Queue, std::vector<double>> periodic_step(const PeriodicPolicy& policy,
                                                    long k, int n);

/// Scalar summary of one sensor's state, enough to price a slot.
struct SensorSnapshot {
  double tr_p_bar = 0.0;  // Tr Pbar
  double tr_h_p = 0.0;    // Tr h(P_prev)
  int rank = 0;           // numerical rank of h(P_prev) - Pbar

  double delta() const { return tr_h_p - tr_p_bar; }
};

SensorSnapshot make_snapshot(const CovMaps& maps, const Matrix& p_prev);
std::vector<SensorSnapshot> make_snapshots(const std::vector<CovMaps>& maps,
                                           const std::vector<Matrix>& p_prev);

/// Sensors sorted by Tr[h(P_prev) - Pbar] descending, ties by lower index.
/// If ranks are unequal the same key is used anyway; *equal_ranks reports it.
Queue greedy_order(const std::vector<SensorSnapshot>& states,
                   bool* equal_ranks = nullptr);

/// One-step expected cost sum_i Tr E[P_i(k)] for a queue and per-sensor
/// alphas (the last queue position's alpha is ignored).
double expected_one_step_cost(const Queue& queue,
                              const std::vector<SensorSnapshot>& states,
                              const std::vector<double>& alphas);

/// Closed-form intensity for the sensor ahead of the unconditional last one:
/// alpha_hat* = min(1, ell * lambda / (ell + 2)),
/// lambda = Tr[h_n(P_n)-Pbar_n] / Tr[h_{n-1}(P_{n-1})-Pbar_{n-1}].
double greedy_last_pair_alpha_hat(double lambda, int ell);

/// Minimize expected_one_step_cost over per-sensor alphas for a fixed queue.
/// Coordinate descent with golden-section per coordinate; for n = 2 the
/// closed form is used when settings allow. Returns alphas by sensor (the
/// last queue position gets infinity).
std::vector<double> greedy_alphas(const Queue& queue,
                                  const std::vector<SensorSnapshot>& states,
                                  const GreedySettings& settings = {});

/// Full greedy decision from broadcast state.
std::pair<Queue, std::vector<double>> greedy_step(
    const std::vector<SensorSnapshot>& states,
    const GreedySettings& settings = {});

}  // namespace relest
