#include "relest/scheduling.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "relest/rng.hpp"
#include "relest/trigger.hpp"

namespace relest {

bool Queue::is_permutation() const {
  std::vector<bool> seen(order.size(), false);
  for (int s : order) {
    if (s < 0 || s >= n() || seen[s]) return false;
    seen[s] = true;
  }
  return true;
}

TransmissionOutcome resolve_channel(const Queue& queue,
                                    const std::vector<int>& eta_draws) {
  const int n = queue.n();
  if (!queue.is_permutation()) {
    throw std::invalid_argument("resolve_channel: queue is not a permutation");
  }
  if (static_cast<int>(eta_draws.size()) != n) {
    throw std::invalid_argument("resolve_channel: eta_draws size mismatch");
  }
  TransmissionOutcome out;
  out.eta.assign(n, 0);
  out.mu.assign(n, 0);
  out.gamma.assign(n, 0);

  bool taken = false;
  for (int pos = 0; pos < n; ++pos) {
    int s = queue.order[pos];
    out.mu[s] = taken ? 0 : 1;
    bool last = pos == n - 1;
    if (!last) {
      if (eta_draws[s] < 0 && !taken) {
        throw std::invalid_argument(
            "resolve_channel: missing eta draw for a non-last sensor");
      }
      out.eta[s] = eta_draws[s] > 0 ? 1 : 0;
    }
    if (!taken && (last || out.eta[s])) {
      out.gamma[s] = 1;
      out.transmitter = s;
      taken = true;
    }
  }
  return out;
}

std::pair<Queue, std::vector<double>> periodic_step(const PeriodicPolicy& policy,
                                                    long k, int n) {
  if (policy.table.empty()) {
    throw std::invalid_argument("periodic policy table is empty");
  }
  for (int s : policy.table) {
    if (s < 0 || s >= n) {
      throw std::invalid_argument("periodic table entry out of range");
    }
  }
  int scheduled = policy.table[static_cast<std::size_t>(k % policy.table.size())];
  Queue q;
  q.order.reserve(n);
  q.order.push_back(scheduled);
  for (int s = 0; s < n; ++s) {
    if (s != scheduled) q.order.push_back(s);
  }
  std::vector<double> alphas(n, kInfAlpha);
  alphas[scheduled] = 0.0;
  return {q, alphas};
}

SensorSnapshot make_snapshot(const CovMaps& maps, const Matrix& p_prev) {
  SensorSnapshot s;
  s.tr_p_bar = maps.P_bar().trace();
  Matrix sigma = maps.sigma_pred(p_prev);
  s.tr_h_p = s.tr_p_bar + sigma.trace();
  s.rank = numerical_rank(sigma);
  return s;
}

std::vector<SensorSnapshot> make_snapshots(const std::vector<CovMaps>& maps,
                                           const std::vector<Matrix>& p_prev) {
  if (maps.size() != p_prev.size()) {
    throw std::invalid_argument("make_snapshots: size mismatch");
  }
  std::vector<SensorSnapshot> out;
  out.reserve(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    out.push_back(make_snapshot(maps[i], p_prev[i]));
  }
  return out;
}

Queue greedy_order(const std::vector<SensorSnapshot>& states, bool* equal_ranks) {
  const int n = static_cast<int>(states.size());
  Queue q;
  q.order.resize(n);
  std::iota(q.order.begin(), q.order.end(), 0);
  std::stable_sort(q.order.begin(), q.order.end(), [&](int a, int b) {
    if (states[a].delta() != states[b].delta()) {
      return states[a].delta() > states[b].delta();
    }
    return a < b;
  });
  if (equal_ranks != nullptr) {
    *equal_ranks = true;
    for (int i = 1; i < n; ++i) {
      if (states[i].rank != states[0].rank) *equal_ranks = false;
    }
  }
  return q;
}

namespace {

// One-step cost over queue positions; alpha_hats indexed by queue position,
// the last position's entry unused.
double cost_by_position(const Queue& queue,
                        const std::vector<SensorSnapshot>& states,
                        const std::vector<double>& alpha_hats) {
  const int n = queue.n();
  double survive = 1.0;  // prod of beta over earlier positions
  double cost = 0.0;
  for (int pos = 0; pos < n; ++pos) {
    const SensorSnapshot& s = states[queue.order[pos]];
    if (pos == n - 1) {
      // transmits iff the channel is still free
      cost += survive * s.tr_p_bar + (1.0 - survive) * s.tr_h_p;
      break;
    }
    double ah = alpha_hats[pos];
    double beta = s.rank == 0 ? 1.0 : std::pow(ah, 0.5 * s.rank);
    double tr_t = (1.0 - ah) * s.tr_p_bar + ah * s.tr_h_p;
    // reached with channel free: transmit (Pbar) or hold (t); else h
    cost += survive * ((1.0 - beta) * s.tr_p_bar + beta * tr_t) +
            (1.0 - survive) * s.tr_h_p;
    survive *= beta;
  }
  return cost;
}

std::vector<double> alphas_by_sensor(const Queue& queue,
                                     const std::vector<double>& alpha_hats) {
  std::vector<double> alphas(queue.n(), kInfAlpha);
  for (int pos = 0; pos + 1 < queue.n(); ++pos) {
    alphas[queue.order[pos]] = alpha_of_hat(alpha_hats[pos]);
  }
  return alphas;
}

}  // namespace

double expected_one_step_cost(const Queue& queue,
                              const std::vector<SensorSnapshot>& states,
                              const std::vector<double>& alphas) {
  const int n = queue.n();
  if (static_cast<int>(states.size()) != n) {
    throw std::invalid_argument("expected_one_step_cost: states size mismatch");
  }
  std::vector<double> alpha_hats(std::max(n - 1, 0), 1.0);
  for (int pos = 0; pos + 1 < n; ++pos) {
    alpha_hats[pos] = alpha_hat_of(alphas[queue.order[pos]]);
  }
  return cost_by_position(queue, states, alpha_hats);
}

double greedy_last_pair_alpha_hat(double lambda, int ell) {
  if (lambda <= 0.0 || ell <= 0) {
    throw std::invalid_argument("greedy_last_pair_alpha_hat: lambda > 0, ell >= 1");
  }
  return std::min(1.0, ell * lambda / (ell + 2.0));
}

std::vector<double> greedy_alphas(const Queue& queue,
                                  const std::vector<SensorSnapshot>& states,
                                  const GreedySettings& settings) {
  const int n = queue.n();
  if (n <= 1) return std::vector<double>(n, kInfAlpha);

  if (n == 2 && settings.use_closed_form_n2) {
    const SensorSnapshot& first = states[queue.order[0]];
    const SensorSnapshot& last = states[queue.order[1]];
    double ah;
    if (first.delta() <= 0.0 || first.rank == 0) {
      ah = 0.0;  // nothing to trade off; transmit freely
    } else {
      double lambda = last.delta() / first.delta();
      ah = greedy_last_pair_alpha_hat(lambda, first.rank);
    }
    return alphas_by_sensor(queue, {ah, 1.0});
  }

  const int m = n - 1;  // tunable positions
  auto sweep = [&](std::vector<double> ah) {
    double cost = cost_by_position(queue, states, ah);
    for (int iter = 0; iter < 200; ++iter) {
      double prev = cost;
      for (int pos = 0; pos < m; ++pos) {
        double best = golden_section_min(
            [&](double x) {
              double saved = ah[pos];
              ah[pos] = x;
              double c = cost_by_position(queue, states, ah);
              ah[pos] = saved;
              return c;
            },
            0.0, 1.0, settings.alpha_hat_tol);
        ah[pos] = best;
      }
      cost = cost_by_position(queue, states, ah);
      if (prev - cost < settings.cost_tol) break;
    }
    return std::make_pair(ah, cost);
  };

  auto [best_ah, best_cost] = sweep(std::vector<double>(m, 0.5));
  RngStream rng(stream_key(settings.restart_seed, 0, 0, Purpose::TriggerXi));
  for (int r = 0; r < settings.restarts; ++r) {
    std::vector<double> start(m);
    for (double& v : start) v = rng.next_uniform();
    auto [ah, cost] = sweep(std::move(start));
    if (cost < best_cost) {
      best_cost = cost;
      best_ah = ah;
    }
  }
  return alphas_by_sensor(queue, best_ah);
}

std::pair<Queue, std::vector<double>> greedy_step(
    const std::vector<SensorSnapshot>& states, const GreedySettings& settings) {
  bool equal_ranks = true;
  Queue q = greedy_order(states, &equal_ranks);
  if (!equal_ranks) {
    // the ordering rule is provably optimal only under equal innovation
    // ranks; the same key is used regardless. Warn once per process.
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      std::fprintf(stderr,
                   "warning: unequal innovation ranks across sensors; the "
                   "greedy queue ordering is heuristic at such steps\n");
    }
  }
  return {q, greedy_alphas(q, states, settings)};
}

}  // namespace relest
