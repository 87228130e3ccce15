"""Event-based multi-sensor scheduling for remote state estimation.

The heavy lifting lives in the C++ extension; this package re-exports it.
"""

from relest._core import (  # noqa: F401
    CovMaps,
    EpisodeResult,
    GreedySettings,
    LowerBoundSolution,
    LtiSystem,
    MdpPolicy,
    MdpSettings,
    MonteCarloSummary,
    Queue,
    SimContext,
    SteadyStateFilter,
    TransmissionOutcome,
    __version__,
    alpha_hat_of,
    alpha_of_hat,
    draw_eta_probability,
    eta_probability,
    expected_one_step_cost,
    greedy_alphas,
    greedy_last_pair_alpha_hat,
    greedy_order,
    greedy_step,
    holding_covariances,
    load_policy,
    lower_bound,
    mdp_policy_step,
    monte_carlo_cost,
    numerical_rank,
    per_sensor_subproblem,
    periodic_cycle_cost,
    periodic_step,
    phi,
    queue_heuristic_from_rates,
    resolve_channel,
    run_episode,
    save_policy,
    solve_dare,
    spectral_radius,
    train_mdp_policy,
    validate_system,
)

__all__ = [name for name in dir() if not name.startswith("_")]
