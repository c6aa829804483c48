import numpy as np
import pytest

from gesl.common import make_rng
from gesl.errors import CoverageError, ShapeError, ErgodicityError, NumericalError
from gesl.mdp import (
    TabularMDP, TabularPolicy, build_state_transition, build_sa_transition, exact_q,
    bellman_apply, stationary_distribution, sample_trajectory, ratio_matrix,
    cumulative_ratio, value_iteration, load_mdp, save_mdp,
)


def random_mdp(rng, S=3, A=2, gamma=0.9):
    P = rng.random((S, A, S))
    P /= P.sum(-1, keepdims=True)
    R = rng.normal(size=(S, A))
    return TabularMDP(P, R, gamma)


def random_policy(rng, S=3, A=2):
    p = rng.random((S, A)) + 0.1
    return TabularPolicy(p / p.sum(-1, keepdims=True))


def test_transitions_are_stochastic():
    rng = make_rng(0)
    mdp = random_mdp(rng)
    pi = random_policy(rng)
    np.testing.assert_allclose(build_state_transition(mdp, pi).sum(-1), 1, atol=1e-12)
    np.testing.assert_allclose(build_sa_transition(mdp, pi).sum(-1), 1, atol=1e-12)


def test_exact_q_is_bellman_fixed_point():
    rng = make_rng(1)
    mdp = random_mdp(rng)
    pi = random_policy(rng)
    q = exact_q(mdp, pi)
    np.testing.assert_allclose(bellman_apply(mdp, pi, q), q, atol=1e-10)


def test_stationary_distribution():
    rng = make_rng(2)
    mdp = random_mdp(rng)
    pi = random_policy(rng)
    xi = stationary_distribution(mdp, pi)
    P = build_sa_transition(mdp, pi)
    np.testing.assert_allclose(xi @ P, xi, atol=1e-10)
    assert abs(xi.sum() - 1) < 1e-12


def test_stationary_distribution_not_unique():
    # two disconnected absorbing states
    P = np.zeros((2, 1, 2))
    P[0, 0, 0] = 1
    P[1, 0, 1] = 1
    mdp = TabularMDP(P, np.zeros((2, 1)), 0.9)
    with pytest.raises(ErgodicityError):
        stationary_distribution(mdp, TabularPolicy.uniform(2, 1))


def test_pair_order_round_trip():
    S, A = 2, 2
    P = np.full((S, A, S), 0.5)
    order = [(a_s % S, a_s // S) for a_s in range(S * A)]
    mdp = TabularMDP(P, np.arange(4.0).reshape(2, 2), 0.9, pair_order=order)
    table = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(mdp.to_pairs(table), [1.0, 3.0, 2.0, 4.0])
    np.testing.assert_array_equal(mdp.from_pairs(mdp.to_pairs(table)), table)
    assert mdp.pair_index(1, 0) == 1


def test_invalid_inputs():
    with pytest.raises(ShapeError):
        TabularMDP(np.full((2, 2, 3), 1 / 3), np.zeros((2, 2)), 0.9)
    with pytest.raises(ValueError):
        TabularMDP(np.full((2, 2, 2), 0.4), np.zeros((2, 2)), 0.9)
    with pytest.raises(ValueError):
        TabularMDP(np.full((2, 2, 2), 0.5), np.zeros((2, 2)), 1.0)
    with pytest.raises(ValueError):
        TabularPolicy([[0.7, 0.7]])


def test_coverage():
    pi = TabularPolicy([[0.5, 0.5]])
    mu = TabularPolicy([[1.0, 0.0]])
    with pytest.raises(CoverageError):
        ratio_matrix(pi, mu)
    rho = ratio_matrix(TabularPolicy([[1.0, 0.0]]), TabularPolicy([[0.5, 0.5]]))
    np.testing.assert_allclose(rho, [[2.0, 0.0]])


def test_sample_trajectory_and_ratios():
    rng = make_rng(3)
    mdp = random_mdp(rng)
    pi, mu = random_policy(rng), random_policy(rng)
    traj = sample_trajectory(mdp, mu, rng, max_horizon=10)
    assert traj.horizon == 10
    assert len(traj.states) == len(traj.actions) == 11
    assert not traj.terminated
    assert len(traj.steps) == 10
    assert cumulative_ratio(pi, mu, traj, 3, 2) == 1.0
    rho = ratio_matrix(pi, mu)
    expected = np.prod([rho[s, a] for s, a in zip(traj.states[1:4], traj.actions[1:4])])
    assert abs(cumulative_ratio(pi, mu, traj, 1, 3) - expected) < 1e-12


def test_trajectory_stops_at_terminal():
    P = np.zeros((2, 1, 2))
    P[0, 0, 1] = 1
    P[1, 0, 1] = 1
    mdp = TabularMDP(P, [[-1.0], [0.0]], 1.0, terminal=[False, True])
    traj = sample_trajectory(mdp, TabularPolicy.uniform(2, 1), make_rng(0), max_horizon=50)
    assert traj.terminated and traj.horizon == 1
    np.testing.assert_allclose(exact_q(mdp, TabularPolicy.uniform(2, 1)), [[-1.0], [0.0]])


def test_exact_q_improper_policy():
    # a self loop that never reaches the terminal state
    P = np.zeros((2, 1, 2))
    P[0, 0, 0] = 1
    P[1, 0, 1] = 1
    mdp = TabularMDP(P, [[-1.0], [0.0]], 1.0, terminal=[False, True])
    with pytest.raises(NumericalError):
        exact_q(mdp, TabularPolicy.uniform(2, 1))


def test_value_iteration_chain():
    # corridor 0 -> 1 -> 2 (terminal), reward -1 per step
    P = np.zeros((3, 2, 3))
    P[0, 0, 0] = P[1, 0, 0] = 1
    P[0, 1, 1] = P[1, 1, 2] = 1
    P[2, :, 2] = 1
    R = np.array([[-1.0, -1.0], [-1.0, -1.0], [0.0, 0.0]])
    mdp = TabularMDP(P, R, 1.0, terminal=[False, False, True])
    q, policy = value_iteration(mdp)
    np.testing.assert_allclose(q.max(-1), [-2.0, -1.0, 0.0])
    np.testing.assert_array_equal(policy.probs[:2].argmax(-1), [1, 1])


def test_load_save_mdp(tmp_path):
    rng = make_rng(4)
    mdp = random_mdp(rng)
    fp = tmp_path / "mdp.yaml"
    save_mdp(fp, mdp)
    loaded = load_mdp(fp)
    np.testing.assert_allclose(loaded.P, mdp.P)
    np.testing.assert_allclose(loaded.R, mdp.R)
    assert loaded.gamma == mdp.gamma
