"""Smoke tests for the Python bindings: every main operation is callable and
returns sane values."""

import math

import numpy as np
import pytest

import relest


@pytest.fixture(scope="module")
def ctx():
    s1 = relest.LtiSystem(
        np.array([[2.0, 1.0], [0.0, 1.0]]),
        np.array([[1.0, 2.0]]),
        np.eye(2),
        np.array([[1.0]]),
    )
    s2 = relest.LtiSystem(
        np.array([[1.1, 1.0], [0.0, 1.0]]),
        np.array([[1.0, 1.0]]),
        3 * np.eye(2),
        np.array([[1.0]]),
    )
    return relest.SimContext([s1, s2])


def test_spectral_radius_and_validation():
    assert relest.spectral_radius(np.array([[2.0, 1.0], [0.0, 1.0]])) == pytest.approx(2.0)
    sys1 = relest.LtiSystem(
        np.array([[2.0, 1.0], [0.0, 1.0]]),
        np.array([[1.0, 2.0]]),
        np.eye(2),
        np.array([[1.0]]),
    )
    report = relest.validate_system(sys1)
    assert report["valid"]
    assert report["warnings"] == []


def test_scalar_dare_matches_quadratic_oracle():
    sys = relest.LtiSystem(
        np.array([[2.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]])
    )
    f = relest.solve_dare(sys)
    oracle = (1.0 + math.sqrt(5.0)) / 4.0
    assert f.P_bar[0, 0] == pytest.approx(oracle, rel=1e-9)


def test_trigger_probability_and_phi():
    assert relest.eta_probability(1.0, 2) == pytest.approx(0.5)
    assert relest.phi(np.zeros(2), np.eye(2)) == 1.0
    emp = relest.draw_eta_probability(np.eye(2), 1.0, n_draws=20000, seed=3)
    assert emp == pytest.approx(0.5, abs=0.02)


def test_resolve_channel():
    out = relest.resolve_channel([0, 1, 2], [0, 1, -1])
    assert out.transmitter == 1
    assert out.gamma == [0, 1, 0]


def test_periodic_cycle_and_simulation_agree(ctx):
    traces, avg = relest.periodic_cycle_cost(ctx, [1, 0, 0])
    summary = relest.monte_carlo_cost(ctx, [1, 0, 0], 999, 2, 11)
    assert summary.mean_J == pytest.approx(avg, rel=1e-9)
    assert len(traces) == 3


def test_greedy_step_and_cost(ctx):
    P = [np.asarray(f.P_bar) for f in ctx.filters]
    queue, alphas = relest.greedy_step(ctx, P)
    assert sorted(queue) == [0, 1]
    cost = relest.expected_one_step_cost(ctx, queue, P, alphas)
    assert cost > 0


def test_episode_determinism(ctx):
    a = relest.run_episode(ctx, "greedy", 100, 42, 0)
    b = relest.run_episode(ctx, "greedy", 100, 42, 0)
    assert a.trace_P == b.trace_P
    assert a.transmitter == b.transmitter


def test_lower_bound_below_schedulers(ctx):
    lb = relest.lower_bound(ctx, ell_max=10, rate_grid_size=40)
    greedy = relest.monte_carlo_cost(ctx, "greedy", 400, 10, 5)
    _, offline = relest.periodic_cycle_cost(ctx, [1, 0, 0])
    assert lb.total_cost <= greedy.mean_J
    assert lb.total_cost <= offline
    assert sum(lb.pi0) <= 1.0 + 1e-9


def test_mdp_train_and_policy(ctx, tmp_path):
    settings = relest.MdpSettings()
    settings.depth = 6
    settings.levels = 16
    settings.alpha_grid = 6
    policy = relest.train_mdp_policy(ctx, settings)
    assert policy.average_cost > ctx.sum_tr_p_bar()
    assert policy.n_states >= 1

    path = str(tmp_path / "policy.json")
    relest.save_policy(policy, path)
    loaded = relest.load_policy(path)
    assert loaded.average_cost == pytest.approx(policy.average_cost)

    P = [np.asarray(f.P_bar) for f in ctx.filters]
    queue, alphas = relest.mdp_policy_step(loaded, P)
    assert sorted(queue) == [0, 1]

    sim = relest.monte_carlo_cost(ctx, loaded, 1000, 10, 17)
    assert sim.mean_J == pytest.approx(policy.average_cost, rel=0.08)
