#include "relest/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "relest/rng.hpp"
#include "relest/trigger.hpp"

namespace relest {

SimContext SimContext::create(SystemSet systems) {
  SimContext ctx;
  ctx.systems = std::move(systems);
  ctx.filters.reserve(ctx.systems.n());
  for (const LtiSystem& sys : ctx.systems.systems) {
    ctx.filters.push_back(solve_dare(sys));
  }
  ctx.maps.reserve(ctx.systems.n());
  for (int i = 0; i < ctx.systems.n(); ++i) {
    ctx.maps.emplace_back(ctx.systems.systems[i], ctx.filters[i]);
  }
  return ctx;
}

double SimContext::sum_tr_p_bar() const {
  double s = 0.0;
  for (const auto& f : filters) s += f.P_bar.trace();
  return s;
}

namespace {

std::pair<Queue, std::vector<double>> schedule_step(
    const SimContext& ctx, const SchedulePolicy& policy, long k,
    const std::vector<Matrix>& P_prev) {
  const int n = ctx.n();
  if (const auto* periodic = std::get_if<PeriodicPolicy>(&policy)) {
    return periodic_step(*periodic, k, n);
  }
  if (const auto* greedy = std::get_if<GreedyPolicy>(&policy)) {
    return greedy_step(make_snapshots(ctx.maps, P_prev), greedy->settings);
  }
  const auto& mdp = std::get<MdpSchedule>(policy);
  return mdp_policy_step(*mdp.policy, P_prev);
}

}  // namespace

EpisodeResult run_episode(const SimContext& ctx, const SchedulePolicy& policy,
                          long T, std::uint64_t seed, std::uint64_t episode) {
  const int n = ctx.n();
  if (T < 1) throw std::invalid_argument("run_episode: T must be >= 1");

  EpisodeResult res;
  res.n = n;
  res.T = T;
  res.seed = seed;
  res.episode = episode;
  res.trace_P.resize(T * n);
  res.sq_error.resize(T * n);
  res.transmitter.resize(T);
  res.eta.assign(T * n, 0);
  res.mu.assign(T * n, 0);
  res.gamma.assign(T * n, 0);
  res.dim_offset.resize(n + 1);
  res.dim_offset[0] = 0;
  for (int i = 0; i < n; ++i) {
    res.dim_offset[i + 1] = res.dim_offset[i] + ctx.systems.systems[i].dim_x;
  }
  const int dim_total = res.dim_offset[n];
  res.error.resize(T * dim_total);

  // per-sensor streams and noise shapers
  std::vector<RngStream> w_rng, v_rng, xi_rng;
  std::vector<Matrix> q_sqrt, r_sqrt, pbar_sqrt;
  w_rng.reserve(n);
  v_rng.reserve(n);
  xi_rng.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto id = static_cast<std::uint64_t>(i);
    w_rng.emplace_back(stream_key(seed, episode, id, Purpose::ProcessNoise));
    v_rng.emplace_back(stream_key(seed, episode, id, Purpose::MeasurementNoise));
    xi_rng.emplace_back(stream_key(seed, episode, id, Purpose::TriggerXi));
    q_sqrt.push_back(psd_sqrt(ctx.systems.systems[i].Q));
    r_sqrt.push_back(psd_sqrt(ctx.systems.systems[i].R));
    pbar_sqrt.push_back(psd_sqrt(ctx.filters[i].P_bar));
  }

  // Error-coordinate state. eps_local is stationary from the start per the
  // standing steady-state assumption; the fusion center is synchronized at
  // k = 0 (a reception for every sensor), so P = Pbar and eps = 0.
  std::vector<Vector> eps_local(n), eps(n);
  std::vector<Matrix> P(n);
  std::vector<std::uint8_t> received(n, 1);
  for (int i = 0; i < n; ++i) {
    RngStream init(stream_key(seed, episode, static_cast<std::uint64_t>(i),
                              Purpose::InitLocalError));
    eps_local[i] = init.gaussian_vector(pbar_sqrt[i]);
    eps[i] = Vector::Zero(ctx.systems.systems[i].dim_x);
    P[i] = ctx.filters[i].P_bar;
  }

  double cost_sum = 0.0;
  std::vector<int> eta_draws(n, -1);
  for (long k = 1; k <= T; ++k) {
    // local filters driven by the plant noises, in error coordinates:
    //   delta = Kbar (C (A eps_local + w) + v), eps_local' = pred - delta
    for (int i = 0; i < n; ++i) {
      const LtiSystem& sys = ctx.systems.systems[i];
      Vector w = w_rng[i].gaussian_vector(q_sqrt[i]);
      Vector v = v_rng[i].gaussian_vector(r_sqrt[i]);
      Vector pred = sys.A * eps_local[i] + w;
      Vector delta = ctx.filters[i].K_bar * (sys.C * pred + v);
      eps_local[i] = pred - delta;
      eps[i] = received[i] ? delta : (sys.A * eps[i] + delta).eval();
    }

    auto [queue, alphas] = schedule_step(ctx, policy, k - 1, P);

    // one xi draw per sensor per step keeps the streams aligned across
    // policies; the last queue position's draw is simply unused
    for (int i = 0; i < n; ++i) {
      Matrix sigma = ctx.maps[i].sigma_pred(P[i]);
      TriggerDecision d = draw_eta(xi_rng[i], eps[i], alphas[i], sigma);
      eta_draws[i] = d.eta ? 1 : 0;
    }
    TransmissionOutcome out = resolve_channel(queue, eta_draws);

    double slot_cost = 0.0;
    for (int i = 0; i < n; ++i) {
      P[i] = covariance_update(ctx.maps[i], P[i], out.gamma[i], out.mu[i],
                               alphas[i]);
      received[i] = out.gamma[i];
      Vector err = out.gamma[i] ? eps_local[i] : (eps_local[i] + eps[i]).eval();
      std::size_t idx = (k - 1) * n + i;
      res.trace_P[idx] = P[i].trace();
      res.sq_error[idx] = err.squaredNorm();
      for (Eigen::Index d = 0; d < err.size(); ++d) {
        res.error[(k - 1) * dim_total + res.dim_offset[i] + d] = err[d];
      }
      res.eta[idx] = out.eta[i];
      res.mu[idx] = out.mu[i];
      res.gamma[idx] = out.gamma[i];
      slot_cost += res.trace_P[idx];
    }
    res.transmitter[k - 1] = out.transmitter;
    cost_sum += slot_cost;
  }
  res.episode_cost = cost_sum / static_cast<double>(T);
  return res;
}

MonteCarloSummary monte_carlo_cost(
    const SimContext& ctx, const SchedulePolicy& policy, long T, long n_runs,
    std::uint64_t seed,
    const std::function<void(const EpisodeResult&)>& on_episode) {
  if (n_runs < 1) throw std::invalid_argument("monte_carlo_cost: n_runs >= 1");
  if (T < 1) throw std::invalid_argument("monte_carlo_cost: T >= 1");

  const int n = ctx.n();
  MonteCarloSummary s;
  s.runs = n_runs;
  s.T = T;
  s.per_sensor_J.assign(n, 0.0);
  double sum = 0.0, sum_sq = 0.0, sq_err_sum = 0.0;

  for (long ep = 0; ep < n_runs; ++ep) {
    EpisodeResult r =
        run_episode(ctx, policy, T, seed, static_cast<std::uint64_t>(ep));
    sum += r.episode_cost;
    sum_sq += r.episode_cost * r.episode_cost;
    for (long k = 0; k < T; ++k) {
      for (int i = 0; i < n; ++i) {
        s.per_sensor_J[i] += r.trace_P[k * n + i];
        sq_err_sum += r.sq_error[k * n + i];
      }
    }
    if (on_episode) on_episode(r);
  }

  s.mean_J = sum / n_runs;
  if (n_runs > 1) {
    double var = (sum_sq - sum * sum / n_runs) / (n_runs - 1);
    s.std_error = std::sqrt(std::max(0.0, var) / n_runs);
  } else {
    s.std_error = 0.0;
    s.single_sample = true;
  }
  for (double& v : s.per_sensor_J) v /= static_cast<double>(n_runs) * T;
  s.mean_sq_error_J = sq_err_sum / (static_cast<double>(n_runs) * T);
  return s;
}

PeriodicCycle periodic_cycle_cost(const SimContext& ctx,
                                  const PeriodicPolicy& policy) {
  const int n = ctx.n();
  const int period = static_cast<int>(policy.table.size());
  if (period == 0) throw std::invalid_argument("empty periodic table");

  // roll the deterministic cycle to its steady state, then read one period
  std::vector<Matrix> P(n);
  for (int i = 0; i < n; ++i) P[i] = ctx.filters[i].P_bar;
  auto advance = [&](long k) {
    int sched = policy.table[k % period];
    for (int i = 0; i < n; ++i) {
      P[i] = i == sched ? ctx.filters[i].P_bar : ctx.maps[i].h(P[i]);
    }
  };
  // one full pass per sensor guarantees every sensor has been reset once
  // (every sensor must appear in the table for the cycle to be bounded)
  for (int i = 0; i < n; ++i) {
    bool appears = false;
    for (int s : policy.table) appears |= s == i;
    if (!appears) {
      throw std::invalid_argument(
          "periodic table never schedules sensor " + std::to_string(i + 1) +
          "; its covariance diverges");
    }
  }
  for (long k = 0; k < 2L * period; ++k) advance(k);

  PeriodicCycle cyc;
  cyc.traces.resize(period, std::vector<double>(n));
  double total = 0.0;
  for (long k = 0; k < period; ++k) {
    advance(k);
    for (int i = 0; i < n; ++i) {
      cyc.traces[k][i] = P[i].trace();
      total += cyc.traces[k][i];
    }
  }
  cyc.average_cost = total / period;
  return cyc;
}

}  // namespace relest
