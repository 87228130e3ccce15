#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "relest/config.hpp"
#include "relest/io.hpp"
#include "relest/lowerbound.hpp"
#include "relest/mdp.hpp"
#include "relest/simulate.hpp"

namespace fs = std::filesystem;
using namespace relest;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> runs;
  std::optional<long> horizon;
  std::optional<std::string> out_dir;
  std::optional<std::string> scheduler;
};

void add_common(CLI::App* cmd, std::string& config_path, Overrides& ov) {
  cmd->add_option("config,--config", config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", ov.seed, "override the config seed");
  cmd->add_option("--runs", ov.runs, "override the number of episodes");
  cmd->add_option("--horizon", ov.horizon, "override the episode horizon T");
  cmd->add_option("--out", ov.out_dir, "override the output directory");
  cmd->add_option("--scheduler", ov.scheduler,
                  "override the scheduler (offline|greedy|mdp)");
}

ExperimentConfig load_with_overrides(const std::string& path, const Overrides& ov) {
  ExperimentConfig cfg = load_config(path);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.runs) cfg.runs = *ov.runs;
  if (ov.horizon) cfg.horizon = *ov.horizon;
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.scheduler) cfg.scheduler.kind = scheduler_kind_from_string(*ov.scheduler);
  return cfg;
}

void print_matrix(const std::string& name, const Matrix& m) {
  std::cout << "  " << name << " =\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::cout << "    [";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::cout << (c ? ", " : "") << m(r, c);
    }
    std::cout << "]\n";
  }
}

int run_validation(const SystemSet& systems, bool print_filters) {
  int rc = 0;
  for (int i = 0; i < systems.n(); ++i) {
    const LtiSystem& sys = systems.systems[i];
    std::cout << "sensor " << i + 1 << " (dim_x=" << sys.dim_x
              << ", dim_y=" << sys.dim_y << ")\n";
    ValidationReport report = validate_system(sys);
    for (const auto& w : report.warnings()) {
      std::cout << "  warning: " << w << "\n";
    }
    for (const auto& e : report.errors()) {
      std::cout << "  error: " << e << "\n";
      rc = 1;
    }
    if (report.valid() && print_filters) {
      SteadyStateFilter f = solve_dare(sys);
      std::cout << "  DARE converged in " << f.iterations
                << " iterations (residual " << f.residual << ")\n";
      print_matrix("P_bar", f.P_bar);
      print_matrix("M_bar", f.M_bar);
      print_matrix("K_bar", f.K_bar);
      std::cout << "  Tr P_bar = " << f.P_bar.trace() << "\n";
    }
  }
  return rc;
}

MdpPolicy train_mdp(const SimContext& ctx, const ExperimentConfig& cfg,
                    bool verbose) {
  MdpModel model = build_mdp(ctx.maps, cfg.mdp);
  if (verbose) {
    std::size_t grid_total = 0;
    for (const auto& g : model.grids) grid_total += g.size();
    std::cout << "MDP grid: " << model.n_states() << " states, "
              << model.n_actions() << " actions, " << grid_total
              << " covariance points\n";
  }
  MdpPolicy policy = relative_value_iteration(model);
  policy.system_fingerprint = system_fingerprint(ctx.maps);
  if (verbose) {
    std::cout << "RVI converged in " << policy.iterations
              << " sweeps (span " << policy.span << ")\n"
              << "average cost g = " << policy.average_cost << "\n";
  }
  return policy;
}

SchedulePolicy make_policy(const SimContext& ctx, const ExperimentConfig& cfg) {
  switch (cfg.scheduler.kind) {
    case SchedulerKind::Offline:
      if (cfg.scheduler.periodic_table.empty()) {
        throw ConfigError("offline scheduler requested but no table configured");
      }
      return PeriodicPolicy{cfg.scheduler.periodic_table};
    case SchedulerKind::Greedy:
      return GreedyPolicy{};
    case SchedulerKind::Mdp: {
      auto policy = std::make_shared<MdpPolicy>();
      if (!cfg.scheduler.mdp_policy_file.empty() &&
          fs::exists(cfg.scheduler.mdp_policy_file)) {
        *policy = load_policy(cfg.scheduler.mdp_policy_file);
        if (policy->system_fingerprint != system_fingerprint(ctx.maps)) {
          throw ConfigError("policy file " + cfg.scheduler.mdp_policy_file +
                            " was trained on different systems");
        }
      } else {
        *policy = train_mdp(ctx, cfg, /*verbose=*/true);
      }
      return MdpSchedule{policy};
    }
  }
  throw std::logic_error("unreachable scheduler kind");
}

MonteCarloSummary simulate_to_files(const SimContext& ctx,
                                    const ExperimentConfig& cfg,
                                    const SchedulePolicy& policy,
                                    const std::string& name) {
  fs::create_directories(cfg.out_dir);
  TraceCsvWriter csv((fs::path(cfg.out_dir) / (name + "_traces.csv")).string());
  MonteCarloSummary s = monte_carlo_cost(
      ctx, policy, cfg.horizon, cfg.runs, cfg.seed,
      [&](const EpisodeResult& ep) { csv.write_episode(ep); });
  write_summary_json((fs::path(cfg.out_dir) / (name + "_summary.json")).string(),
                     s, name, cfg.seed);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "relest: stochastic event-based sensor scheduling for remote state "
      "estimation"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;

  CLI::App* dare = app.add_subcommand(
      "dare", "solve the steady-state filters and validate each system");
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo simulation of the configured scheduler");
  CLI::App* lower = app.add_subcommand(
      "lower-bound", "compute the relaxed-schedule lower bound (Prop. 1)");
  CLI::App* train = app.add_subcommand(
      "mdp-train", "build the discretized MDP, run RVI and persist the policy");
  CLI::App* compare = app.add_subcommand(
      "compare", "run offline/greedy/MDP + LB and emit a comparison table");
  for (CLI::App* cmd : {dare, simulate, lower, train, compare}) {
    add_common(cmd, config_path, ov);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load_with_overrides(config_path, ov);

    if (dare->parsed()) {
      return run_validation(cfg.systems, /*print_filters=*/true);
    }

    SimContext ctx = SimContext::create(cfg.systems);

    if (simulate->parsed()) {
      SchedulePolicy policy = make_policy(ctx, cfg);
      std::string name = to_string(cfg.scheduler.kind);
      MonteCarloSummary s = simulate_to_files(ctx, cfg, policy, name);
      std::cout << "J(" << name << ") = " << s.mean_J << " +- " << s.std_error
                << "  (runs=" << s.runs << ", T=" << s.T << ")\n";
      if (s.single_sample) {
        std::cout << "note: single sample; standard error reported as 0\n";
      }
      std::cout << "outputs in " << cfg.out_dir << "/\n";
      return 0;
    }

    if (lower->parsed()) {
      LowerBoundSolution lb = lower_bound(ctx.maps, cfg.ell_max, cfg.rate_grid);
      std::cout << "LB = " << lb.total_cost << "  (ell_max=" << lb.ell_max
                << ", rate grid=" << cfg.rate_grid << ")\n";
      for (std::size_t i = 0; i < lb.pi0.size(); ++i) {
        std::cout << "  sensor " << i + 1 << ": pi0 = " << lb.pi0[i]
                  << ", J_i = " << lb.sensor_cost[i] << "\n";
      }
      fs::create_directories(cfg.out_dir);
      write_gap_report_json(
          (fs::path(cfg.out_dir) / "gap_report.json").string(), {}, lb);
      std::cout << "gap report in " << cfg.out_dir << "/gap_report.json\n";
      return 0;
    }

    if (train->parsed()) {
      MdpPolicy policy = train_mdp(ctx, cfg, /*verbose=*/true);
      fs::create_directories(cfg.out_dir);
      std::string path = cfg.scheduler.mdp_policy_file.empty()
                             ? (fs::path(cfg.out_dir) / "mdp_policy.json").string()
                             : cfg.scheduler.mdp_policy_file;
      save_policy(policy, path);
      std::cout << "policy written to " << path << "\n";
      return 0;
    }

    // compare
    std::map<std::string, MonteCarloSummary> results;
    if (!cfg.scheduler.periodic_table.empty()) {
      ExperimentConfig c = cfg;
      c.scheduler.kind = SchedulerKind::Offline;
      results["offline"] = simulate_to_files(
          ctx, c, PeriodicPolicy{cfg.scheduler.periodic_table}, "offline");
      std::cout << "J(offline) = " << results["offline"].mean_J << "\n";
    }
    results["greedy"] = simulate_to_files(ctx, cfg, GreedyPolicy{}, "greedy");
    std::cout << "J(greedy) = " << results["greedy"].mean_J << "\n";
    {
      ExperimentConfig c = cfg;
      c.scheduler.kind = SchedulerKind::Mdp;
      SchedulePolicy mdp_policy = make_policy(ctx, c);
      results["mdp"] = simulate_to_files(ctx, c, mdp_policy, "mdp");
      std::cout << "J(mdp) = " << results["mdp"].mean_J
                << "  (computed average cost "
                << std::get<MdpSchedule>(mdp_policy).policy->average_cost
                << ")\n";
    }
    LowerBoundSolution lb = lower_bound(ctx.maps, cfg.ell_max, cfg.rate_grid);
    std::cout << "LB = " << lb.total_cost << "\n";
    fs::create_directories(cfg.out_dir);
    write_compare_csv((fs::path(cfg.out_dir) / "compare.csv").string(), results, lb);
    write_gap_report_json((fs::path(cfg.out_dir) / "gap_report.json").string(),
                          results, lb);
    std::cout << "comparison table in " << cfg.out_dir << "/compare.csv\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const DetectabilityError& e) {
    std::cerr << "detectability failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
