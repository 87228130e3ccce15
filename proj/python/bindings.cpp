#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relest/config.hpp"
#include "relest/lowerbound.hpp"
#include "relest/mdp.hpp"
#include "relest/simulate.hpp"
#include "relest/trigger.hpp"

namespace py = pybind11;
using namespace relest;

namespace {

SchedulePolicy policy_from_object(const SimContext& ctx, const py::object& spec) {
  if (py::isinstance<py::list>(spec) || py::isinstance<py::tuple>(spec)) {
    // periodic transmitter table, 0-based
    PeriodicPolicy p;
    for (auto item : spec.cast<py::sequence>()) {
      p.table.push_back(item.cast<int>());
    }
    return p;
  }
  if (py::isinstance<py::str>(spec)) {
    std::string s = spec.cast<std::string>();
    if (s == "greedy") return GreedyPolicy{};
    throw std::invalid_argument("unknown policy spec '" + s +
                                "' (use 'greedy', a table, or an MdpPolicy)");
  }
  auto policy = std::make_shared<MdpPolicy>(spec.cast<MdpPolicy>());
  (void)ctx;
  return MdpSchedule{std::move(policy)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Event-based multi-sensor scheduling for remote state estimation";
  m.attr("__version__") = "0.1.0";

  py::class_<LtiSystem>(m, "LtiSystem")
      .def(py::init([](Matrix A, Matrix C, Matrix Q, Matrix R, py::object Pi0) {
             Matrix pi0;
             if (!Pi0.is_none()) pi0 = Pi0.cast<Matrix>();
             return LtiSystem::create(std::move(A), std::move(C), std::move(Q),
                                      std::move(R), std::move(pi0));
           }),
           py::arg("A"), py::arg("C"), py::arg("Q"), py::arg("R"),
           py::arg("Pi0") = py::none())
      .def_readonly("A", &LtiSystem::A)
      .def_readonly("C", &LtiSystem::C)
      .def_readonly("Q", &LtiSystem::Q)
      .def_readonly("R", &LtiSystem::R)
      .def_readonly("Pi0", &LtiSystem::Pi0)
      .def_readonly("dim_x", &LtiSystem::dim_x)
      .def_readonly("dim_y", &LtiSystem::dim_y);

  m.def("spectral_radius", &spectral_radius, py::arg("A"));
  m.def("numerical_rank", &numerical_rank, py::arg("Sigma"));
  m.def("validate_system", [](const LtiSystem& sys) {
    ValidationReport r = validate_system(sys);
    py::dict out;
    out["valid"] = r.valid();
    out["errors"] = r.errors();
    out["warnings"] = r.warnings();
    return out;
  });

  py::class_<SteadyStateFilter>(m, "SteadyStateFilter")
      .def_readonly("P_bar", &SteadyStateFilter::P_bar)
      .def_readonly("M_bar", &SteadyStateFilter::M_bar)
      .def_readonly("K_bar", &SteadyStateFilter::K_bar)
      .def_readonly("iterations", &SteadyStateFilter::iterations)
      .def_readonly("residual", &SteadyStateFilter::residual);
  m.def("solve_dare", &solve_dare, py::arg("system"));

  m.def("phi", &phi, py::arg("z"), py::arg("Pi"));
  m.def("alpha_hat_of", &alpha_hat_of, py::arg("alpha"));
  m.def("alpha_of_hat", &alpha_of_hat, py::arg("alpha_hat"));
  m.def(
      "eta_probability",
      [](double alpha, int rank) {
        return eta_probability(TriggerParams::from_alpha(alpha, rank));
      },
      py::arg("alpha"), py::arg("rank"));
  m.def(
      "draw_eta_probability",
      [](const Matrix& sigma, double alpha, int n_draws, std::uint64_t seed) {
        // Monte Carlo estimate of P(eta = 1) for eps ~ N(0, Sigma)
        RngStream eps_rng(stream_key(seed, 0, 0, Purpose::ProcessNoise));
        RngStream xi_rng(stream_key(seed, 0, 0, Purpose::TriggerXi));
        Matrix s = psd_sqrt(sigma);
        long hits = 0;
        for (int i = 0; i < n_draws; ++i) {
          Vector eps = eps_rng.gaussian_vector(s);
          hits += draw_eta(xi_rng, eps, alpha, sigma).eta;
        }
        return static_cast<double>(hits) / n_draws;
      },
      py::arg("Sigma"), py::arg("alpha"), py::arg("n_draws") = 100000,
      py::arg("seed") = 1);

  py::class_<CovMaps>(m, "CovMaps")
      .def("h", &CovMaps::h, py::arg("X"))
      .def("g", &CovMaps::g, py::arg("X"), py::arg("alpha"))
      .def("t", &CovMaps::t, py::arg("X"), py::arg("alpha"))
      .def("sigma_pred", &CovMaps::sigma_pred, py::arg("P_prev"))
      .def_property_readonly("P_bar", &CovMaps::P_bar);

  py::class_<Queue>(m, "Queue")
      .def(py::init([](std::vector<int> order) { return Queue{std::move(order)}; }))
      .def_readonly("order", &Queue::order);

  py::class_<TransmissionOutcome>(m, "TransmissionOutcome")
      .def_readonly("transmitter", &TransmissionOutcome::transmitter)
      .def_property_readonly("eta",
                             [](const TransmissionOutcome& o) {
                               return std::vector<int>(o.eta.begin(), o.eta.end());
                             })
      .def_property_readonly("mu",
                             [](const TransmissionOutcome& o) {
                               return std::vector<int>(o.mu.begin(), o.mu.end());
                             })
      .def_property_readonly("gamma", [](const TransmissionOutcome& o) {
        return std::vector<int>(o.gamma.begin(), o.gamma.end());
      });
  m.def(
      "resolve_channel",
      [](const std::vector<int>& order, const std::vector<int>& eta) {
        return resolve_channel(Queue{order}, eta);
      },
      py::arg("queue"), py::arg("eta_draws"));

  py::class_<GreedySettings>(m, "GreedySettings")
      .def(py::init<>())
      .def_readwrite("alpha_hat_tol", &GreedySettings::alpha_hat_tol)
      .def_readwrite("cost_tol", &GreedySettings::cost_tol)
      .def_readwrite("restarts", &GreedySettings::restarts)
      .def_readwrite("use_closed_form_n2", &GreedySettings::use_closed_form_n2);

  py::class_<SimContext>(m, "SimContext")
      .def(py::init([](const std::vector<LtiSystem>& systems) {
        return SimContext::create(SystemSet::create(systems));
      }))
      .def_property_readonly(
          "filters", [](const SimContext& c) { return c.filters; })
      .def_property_readonly("maps", [](const SimContext& c) -> const std::vector<CovMaps>& {
        return c.maps;
      }, py::return_value_policy::reference_internal)
      .def_property_readonly("n", &SimContext::n)
      .def("sum_tr_p_bar", &SimContext::sum_tr_p_bar);

  m.def(
      "periodic_step",
      [](const std::vector<int>& table, long k, int n) {
        auto [q, alphas] = periodic_step(PeriodicPolicy{table}, k, n);
        return py::make_tuple(q.order, alphas);
      },
      py::arg("table"), py::arg("k"), py::arg("n"));

  m.def(
      "greedy_order",
      [](const SimContext& ctx, const std::vector<Matrix>& P_prev) {
        return greedy_order(make_snapshots(ctx.maps, P_prev)).order;
      },
      py::arg("ctx"), py::arg("P_prev"));
  m.def(
      "expected_one_step_cost",
      [](const SimContext& ctx, const std::vector<int>& queue,
         const std::vector<Matrix>& P_prev, const std::vector<double>& alphas) {
        return expected_one_step_cost(Queue{queue},
                                      make_snapshots(ctx.maps, P_prev), alphas);
      },
      py::arg("ctx"), py::arg("queue"), py::arg("P_prev"), py::arg("alphas"));
  m.def("greedy_last_pair_alpha_hat", &greedy_last_pair_alpha_hat,
        py::arg("lambda_"), py::arg("ell"));
  m.def(
      "greedy_alphas",
      [](const SimContext& ctx, const std::vector<int>& queue,
         const std::vector<Matrix>& P_prev, const GreedySettings& settings) {
        return greedy_alphas(Queue{queue}, make_snapshots(ctx.maps, P_prev),
                             settings);
      },
      py::arg("ctx"), py::arg("queue"), py::arg("P_prev"),
      py::arg("settings") = GreedySettings{});
  m.def(
      "greedy_step",
      [](const SimContext& ctx, const std::vector<Matrix>& P_prev,
         const GreedySettings& settings) {
        auto [q, alphas] = greedy_step(make_snapshots(ctx.maps, P_prev), settings);
        return py::make_tuple(q.order, alphas);
      },
      py::arg("ctx"), py::arg("P_prev"), py::arg("settings") = GreedySettings{});

  m.def(
      "holding_covariances",
      [](const SimContext& ctx, int sensor, const std::vector<double>& betas) {
        return holding_covariances(ctx.maps.at(sensor), betas).P;
      },
      py::arg("ctx"), py::arg("sensor"), py::arg("betas"));
  m.def(
      "per_sensor_subproblem",
      [](const SimContext& ctx, int sensor, double rho, int ell_max) {
        PerSensorSolution s =
            per_sensor_subproblem(ctx.maps.at(sensor), rho, ell_max);
        return py::make_tuple(s.betas, s.cost);
      },
      py::arg("ctx"), py::arg("sensor"), py::arg("rho"), py::arg("ell_max"));

  py::class_<LowerBoundSolution>(m, "LowerBoundSolution")
      .def_readonly("pi0", &LowerBoundSolution::pi0)
      .def_readonly("betas", &LowerBoundSolution::betas)
      .def_readonly("sensor_cost", &LowerBoundSolution::sensor_cost)
      .def_readonly("total_cost", &LowerBoundSolution::total_cost)
      .def_readonly("ell_max", &LowerBoundSolution::ell_max);
  m.def(
      "lower_bound",
      [](const SimContext& ctx, int ell_max, int rate_grid_size) {
        return lower_bound(ctx.maps, ell_max, rate_grid_size);
      },
      py::arg("ctx"), py::arg("ell_max") = 20, py::arg("rate_grid_size") = 200);
  m.def("queue_heuristic_from_rates",
        [](const LowerBoundSolution& s) { return queue_heuristic_from_rates(s).order; });

  py::class_<MdpSettings>(m, "MdpSettings")
      .def(py::init<>())
      .def_readwrite("depth", &MdpSettings::depth)
      .def_readwrite("levels", &MdpSettings::levels)
      .def_readwrite("alpha_grid", &MdpSettings::alpha_grid)
      .def_readwrite("state_cap", &MdpSettings::state_cap)
      .def_readwrite("rvi_tol", &MdpSettings::rvi_tol)
      .def_readwrite("rvi_max_iter", &MdpSettings::rvi_max_iter);

  py::class_<MdpPolicy>(m, "MdpPolicy")
      .def_readonly("average_cost", &MdpPolicy::average_cost)
      .def_readonly("iterations", &MdpPolicy::iterations)
      .def_readonly("span", &MdpPolicy::span)
      .def_property_readonly(
          "n_states", [](const MdpPolicy& p) { return p.states.size(); })
      .def_property_readonly(
          "n_actions", [](const MdpPolicy& p) { return p.actions.size(); });

  m.def(
      "train_mdp_policy",
      [](const SimContext& ctx, const MdpSettings& settings) {
        MdpModel model = build_mdp(ctx.maps, settings);
        MdpPolicy policy = relative_value_iteration(model);
        policy.system_fingerprint = system_fingerprint(ctx.maps);
        return policy;
      },
      py::arg("ctx"), py::arg("settings") = MdpSettings{});
  m.def(
      "mdp_policy_step",
      [](const MdpPolicy& policy, const std::vector<Matrix>& current_P) {
        auto [q, alphas] = mdp_policy_step(policy, current_P);
        return py::make_tuple(q.order, alphas);
      },
      py::arg("policy"), py::arg("current_P"));
  m.def("save_policy", &save_policy, py::arg("policy"), py::arg("path"));
  m.def("load_policy", &load_policy, py::arg("path"));

  py::class_<EpisodeResult>(m, "EpisodeResult")
      .def_readonly("n", &EpisodeResult::n)
      .def_readonly("T", &EpisodeResult::T)
      .def_readonly("seed", &EpisodeResult::seed)
      .def_readonly("episode", &EpisodeResult::episode)
      .def_readonly("trace_P", &EpisodeResult::trace_P)
      .def_readonly("sq_error", &EpisodeResult::sq_error)
      .def_readonly("transmitter", &EpisodeResult::transmitter)
      .def_readonly("episode_cost", &EpisodeResult::episode_cost);

  py::class_<MonteCarloSummary>(m, "MonteCarloSummary")
      .def_readonly("mean_J", &MonteCarloSummary::mean_J)
      .def_readonly("std_error", &MonteCarloSummary::std_error)
      .def_readonly("per_sensor_J", &MonteCarloSummary::per_sensor_J)
      .def_readonly("mean_sq_error_J", &MonteCarloSummary::mean_sq_error_J)
      .def_readonly("runs", &MonteCarloSummary::runs)
      .def_readonly("single_sample", &MonteCarloSummary::single_sample);

  m.def(
      "run_episode",
      [](const SimContext& ctx, const py::object& policy, long T,
         std::uint64_t seed, std::uint64_t episode) {
        return run_episode(ctx, policy_from_object(ctx, policy), T, seed, episode);
      },
      py::arg("ctx"), py::arg("policy"), py::arg("T"), py::arg("seed"),
      py::arg("episode") = 0);
  m.def(
      "monte_carlo_cost",
      [](const SimContext& ctx, const py::object& policy, long T, long runs,
         std::uint64_t seed) {
        return monte_carlo_cost(ctx, policy_from_object(ctx, policy), T, runs,
                                seed);
      },
      py::arg("ctx"), py::arg("policy"), py::arg("T"), py::arg("runs"),
      py::arg("seed"));
  m.def(
      "periodic_cycle_cost",
      [](const SimContext& ctx, const std::vector<int>& table) {
        PeriodicCycle c = periodic_cycle_cost(ctx, PeriodicPolicy{table});
        return py::make_tuple(c.traces, c.average_cost);
      },
      py::arg("ctx"), py::arg("table"));
}
