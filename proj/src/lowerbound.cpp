#include "relest/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "relest/rng.hpp"
#include "relest/trigger.hpp"

namespace relest {

namespace {

// Ranks of the predicted-innovation covariance along the holding chain,
// probed with alpha_hat = 0.5 at every depth. Wherever an optimized beta is
// zero, all later survival weights vanish, so any rank divergence past that
// point carries zero cost weight.
std::vector<int> probe_depth_ranks(const CovMaps& maps, int ell_max) {
  std::vector<int> ranks(ell_max);
  Matrix P = maps.P_bar();
  for (int j = 0; j < ell_max; ++j) {
    Matrix sigma = symmetrize(maps.h(P) - maps.P_bar());
    ranks[j] = std::max(1, numerical_rank(sigma));
    P = maps.t(P, 1.0);  // alpha_hat = 0.5
  }
  return ranks;
}

// Scalar engine for the subproblem: covariances tracked as convex
// combinations over the h-iterate basis, so only traces are needed.
struct TraceChain {
  std::vector<double> h_traces;  // Tr h^j(Pbar), j = 0..ell_max
  std::vector<int> ranks;        // per depth

  // trace of P^{j+1} along the recursion for given betas (uses w for the
  // cost weights); returns the cost sum_j w_j * Tr P^{j+1}.
  double weighted_cost(const std::vector<double>& betas,
                       const std::vector<double>& w) const {
    const int L = static_cast<int>(betas.size());
    // coefficients of P^j over the basis; P^0 = e0
    std::vector<double> coeff(L + 1, 0.0);
    coeff[0] = 1.0;
    int top = 0;  // highest nonzero index
    double cost = 0.0;
    for (int j = 0; j < L; ++j) {
      double ah = betas[j] <= 0.0
                      ? 0.0
                      : std::pow(betas[j], 2.0 / ranks[j]);
      // P^{j+1} = (1-ah) e0 + ah * shift(P^j)
      for (int u = top; u >= 0; --u) coeff[u + 1] = ah * coeff[u];
      coeff[0] = 1.0 - ah;
      top = std::min(top + 1, L);
      double tr = 0.0;
      for (int u = 0; u <= top; ++u) tr += coeff[u] * h_traces[u];
      if (j < static_cast<int>(w.size()) && w[j] > 0.0) cost += w[j] * tr;
    }
    return cost;
  }
};

std::vector<double> betas_from_w(const std::vector<double>& w, int ell_max) {
  std::vector<double> betas(ell_max, 0.0);
  double prev = 1.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    betas[j] = prev <= 1e-300 ? 0.0 : std::min(1.0, w[j] / prev);
    prev = w[j];
  }
  return betas;
}

// survival weights w_0 >= w_1 >= ... >= w_{m-1}, all in [0,1], summing to S.
std::vector<double> water_fill(int m, double S) {
  std::vector<double> w(m, 0.0);
  double remain = S;
  for (int j = 0; j < m; ++j) {
    w[j] = std::clamp(remain, 0.0, j == 0 ? 1.0 : w[j - 1]);
    remain -= w[j];
  }
  return w;
}

std::vector<double> random_monotone(RngStream& rng, int m, double S) {
  std::vector<double> w(m);
  for (double& v : w) v = rng.next_uniform();
  std::sort(w.begin(), w.end(), std::greater<>());
  // scale to the target sum, clipping at 1 and redistributing
  for (int pass = 0; pass < 64; ++pass) {
    double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (sum <= 0.0) return water_fill(m, S);
    double f = S / sum;
    bool clipped = false;
    for (double& v : w) {
      v *= f;
      if (v > 1.0) {
        v = 1.0;
        clipped = true;
      }
    }
    if (!clipped) break;
  }
  std::sort(w.begin(), w.end(), std::greater<>());
  double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (std::abs(sum - S) > 1e-9) return water_fill(m, S);
  return w;
}

}  // namespace

HoldingCovariances holding_covariances(const CovMaps& maps,
                                       const std::vector<double>& betas) {
  HoldingCovariances out;
  out.P.reserve(betas.size() + 1);
  out.P.push_back(maps.P_bar());
  for (double beta : betas) {
    if (beta < 0.0 || beta > 1.0) {
      throw std::invalid_argument("holding_covariances: beta outside [0,1]");
    }
    const Matrix& prev = out.P.back();
    Matrix sigma = symmetrize(maps.h(prev) - maps.P_bar());
    int r = std::max(1, numerical_rank(sigma));
    double ah = beta <= 0.0 ? 0.0 : std::pow(beta, 2.0 / r);
    out.P.push_back(maps.t(prev, alpha_of_hat(ah)));
  }
  return out;
}

Matrix holding_covariance_closed_form(const CovMaps& maps,
                                      const std::vector<double>& betas, int j) {
  if (j < 0 || j > static_cast<int>(betas.size())) {
    throw std::invalid_argument("holding_covariance_closed_form: bad depth");
  }
  // alpha_hat per depth, with the recursion's depth-dependent ranks
  HoldingCovariances rec = holding_covariances(maps, betas);
  std::vector<double> ah(betas.size());
  {
    Matrix P = maps.P_bar();
    for (std::size_t u = 0; u < betas.size(); ++u) {
      Matrix sigma = symmetrize(maps.h(P) - maps.P_bar());
      int r = std::max(1, numerical_rank(sigma));
      ah[u] = betas[u] <= 0.0 ? 0.0 : std::pow(betas[u], 2.0 / r);
      P = rec.P[u + 1];
    }
  }
  // first term: prod_{u<j} ah^u * h^j(Pbar)
  std::vector<Matrix> h_pows(j + 1);
  h_pows[0] = maps.P_bar();
  for (int u = 1; u <= j; ++u) h_pows[u] = maps.h(h_pows[u - 1]);

  double lead = 1.0;
  for (int u = 0; u < j; ++u) lead *= ah[u];
  Matrix out = lead * h_pows[j];
  // plus sum_l (1 - ah^{j-1-l}) prod_{u<l} ah^{j-1-u} * h^l(Pbar)
  for (int l = 0; l < j; ++l) {
    double c = 1.0 - ah[j - 1 - l];
    for (int u = 0; u < l; ++u) c *= ah[j - 1 - u];
    out += c * h_pows[l];
  }
  return symmetrize(out);
}

PerSensorSolution per_sensor_subproblem(const CovMaps& maps, double rho,
                                        int ell_max,
                                        const LowerBoundSettings& settings) {
  if (rho <= 0.0 || rho > 1.0) {
    throw std::invalid_argument("per_sensor_subproblem: rho must be in (0,1]");
  }
  if (ell_max < 1) throw std::invalid_argument("ell_max must be >= 1");
  const double S = 1.0 / rho - 1.0;
  const int m = ell_max - 1;  // free survival weights; beta_{ell_max-1} = 0
  if (S > m + 1e-9) {
    throw std::invalid_argument(
        "per_sensor_subproblem: rate " + std::to_string(rho) +
        " is infeasible at ell_max = " + std::to_string(ell_max) +
        "; increase ell_max");
  }

  TraceChain chain;
  chain.h_traces.resize(ell_max + 1);
  {
    Matrix hp = maps.P_bar();
    chain.h_traces[0] = hp.trace();
    for (int j = 1; j <= ell_max; ++j) {
      hp = maps.h(hp);
      chain.h_traces[j] = hp.trace();
    }
  }
  chain.ranks = probe_depth_ranks(maps, ell_max);

  const double tr_p0 = chain.h_traces[0];
  auto cost_of = [&](const std::vector<double>& w) {
    return rho * (tr_p0 + chain.weighted_cost(betas_from_w(w, ell_max), w));
  };

  auto descend = [&](std::vector<double> w) {
    double cost = cost_of(w);
    if (m < 2) return std::make_pair(w, cost);
    for (int sweep = 0; sweep < settings.max_sweeps; ++sweep) {
      double prev_cost = cost;
      // pairwise mass exchange keeps the sum constraint exact
      for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
          double hi_a = a == 0 ? 1.0 : w[a - 1];
          double lo_b = b + 1 < m ? w[b + 1] : 0.0;
          // d > 0 moves mass to the earlier coordinate
          double dmax = std::min(hi_a - w[a], w[b] - lo_b);
          double dmin;
          if (b == a + 1) {
            dmin = -0.5 * (w[a] - w[b]);
          } else {
            dmin = std::max(-(w[a] - w[a + 1]), -(w[b - 1] - w[b]));
          }
          if (dmax - dmin < 1e-12) continue;
          double d = golden_section_min(
              [&](double x) {
                std::vector<double> trial = w;
                trial[a] += x;
                trial[b] -= x;
                return cost_of(trial);
              },
              dmin, dmax, settings.golden_tol);
          if (d != 0.0) {
            std::vector<double> trial = w;
            trial[a] += d;
            trial[b] -= d;
            double c = cost_of(trial);
            if (c < cost) {
              w = std::move(trial);
              cost = c;
            }
          }
        }
      }
      if (prev_cost - cost < settings.cost_tol * (1.0 + std::abs(cost))) break;
    }
    return std::make_pair(w, cost);
  };

  auto [best_w, best_cost] = descend(water_fill(m, S));
  RngStream rng(stream_key(settings.restart_seed, 0,
                           static_cast<std::uint64_t>(ell_max),
                           Purpose::TriggerXi));
  for (int r = 0; r < settings.restarts; ++r) {
    auto [w, cost] = descend(random_monotone(rng, m, S));
    if (cost < best_cost) {
      best_cost = cost;
      best_w = w;
    }
  }

  PerSensorSolution out;
  out.betas = betas_from_w(best_w, ell_max);
  out.cost = best_cost;
  return out;
}

LowerBoundSolution lower_bound(const std::vector<CovMaps>& maps, int ell_max,
                               int rate_grid_size,
                               const LowerBoundSettings& settings) {
  const int n = static_cast<int>(maps.size());
  if (n < 1) throw std::invalid_argument("lower_bound: no systems");
  if (rate_grid_size < 2) throw std::invalid_argument("rate_grid_size >= 2");

  auto solve_alloc = [&](const std::vector<double>& rho)
      -> std::pair<double, std::vector<PerSensorSolution>> {
    std::vector<PerSensorSolution> sols;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      sols.push_back(per_sensor_subproblem(maps[i], rho[i], ell_max, settings));
      total += sols.back().cost;
    }
    return {total, std::move(sols)};
  };

  double min_rho = 1.0 / ell_max;
  std::vector<double> best_rho;
  std::vector<PerSensorSolution> best_sols;
  double best = std::numeric_limits<double>::infinity();

  // The subproblem cost is nonincreasing in the rate, so the optimum sits on
  // the sum-to-one face of the simplex.
  if (n == 1) {
    best_rho = {1.0};
    std::tie(best, best_sols) = solve_alloc(best_rho);
  } else if (n <= 3) {
    const int G = rate_grid_size;
    std::vector<int> idx(n - 1, 1);
    auto try_alloc = [&](const std::vector<double>& rho) {
      for (double r : rho) {
        if (r < min_rho - 1e-12 || r <= 0.0) return;
      }
      auto [total, sols] = solve_alloc(rho);
      if (total < best) {
        best = total;
        best_rho = rho;
        best_sols = std::move(sols);
      }
    };
    if (n == 2) {
      for (int k = 1; k < G; ++k) {
        try_alloc({static_cast<double>(k) / G, 1.0 - static_cast<double>(k) / G});
      }
    } else {
      for (int k1 = 1; k1 < G; ++k1) {
        for (int k2 = 1; k1 + k2 < G; ++k2) {
          double r1 = static_cast<double>(k1) / G;
          double r2 = static_cast<double>(k2) / G;
          try_alloc({r1, r2, 1.0 - r1 - r2});
        }
      }
    }
  } else {
    // coordinate descent on rates: pairwise transfers along the face
    std::vector<double> rho(n, 1.0 / n);
    auto [cur, sols] = solve_alloc(rho);
    best = cur;
    best_rho = rho;
    best_sols = std::move(sols);
    for (int sweep = 0; sweep < 40; ++sweep) {
      double prev = best;
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          double lo = min_rho - rho[a];
          double hi = rho[b] - min_rho;
          if (hi <= lo) continue;
          double d = golden_section_min(
              [&](double x) {
                std::vector<double> trial = rho;
                trial[a] += x;
                trial[b] -= x;
                return solve_alloc(trial).first;
              },
              lo, hi, 1e-3);
          std::vector<double> trial = rho;
          trial[a] += d;
          trial[b] -= d;
          auto [c, s] = solve_alloc(trial);
          if (c < best) {
            best = c;
            rho = trial;
            best_rho = rho;
            best_sols = std::move(s);
          }
        }
      }
      if (prev - best < settings.cost_tol * (1.0 + std::abs(best))) break;
    }
  }

  if (best_rho.empty()) {
    throw std::runtime_error(
        "lower_bound: no feasible rate allocation on the grid; increase "
        "ell_max or the grid size");
  }

  LowerBoundSolution out;
  out.pi0 = best_rho;
  out.total_cost = best;
  out.ell_max = ell_max;
  for (auto& s : best_sols) {
    out.betas.push_back(s.betas);
    out.sensor_cost.push_back(s.cost);
  }
  return out;
}

Queue queue_heuristic_from_rates(const LowerBoundSolution& solution) {
  const int n = static_cast<int>(solution.pi0.size());
  Queue q;
  q.order.resize(n);
  std::iota(q.order.begin(), q.order.end(), 0);
  std::stable_sort(q.order.begin(), q.order.end(), [&](int a, int b) {
    if (solution.pi0[a] != solution.pi0[b]) {
      return solution.pi0[a] < solution.pi0[b];
    }
    return a < b;
  });
  return q;
}

}  // namespace relest
