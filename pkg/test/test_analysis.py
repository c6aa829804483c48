import numpy as np
import pytest

from gesl.analysis import (
    two_state_A, divergence_region, operator_norm, is_negative_definite, expected_iterate,
    expected_saddle_iterate, steps_to_exceed, predicted_divergence_steps, BoxDomain, primal_dual_gap,
    gap_bound, stepsize_gate, box_from_iterates, empirical_mse, empirical_mspbe, monte_carlo_q,
)
from gesl.common import make_rng
from gesl.errors import ShapeError
from gesl.envs import make_two_state, make_corridor, make_baird
from gesl.fa import compute_model, estimate_model, mspbe_quadratic
from gesl.mdp import TabularPolicy, exact_q


def test_divergence_region():
    assert divergence_region(0.0) == pytest.approx(5 / 6)
    assert divergence_region(1.0) == pytest.approx(1.0)
    for lam in (0.0, 0.5, 0.9):
        gamma = divergence_region(lam)
        assert two_state_A(gamma + 0.01, lam)[0, 0] > 0
        assert two_state_A(gamma - 0.01, lam)[0, 0] < 0
    with pytest.raises(ValueError):
        divergence_region(1.5)


def test_closed_form_entries():
    A = two_state_A(0.99, 0.9)
    assert A[0, 1] == 0 and A[1, 1] == -2.5
    assert A[0, 0] == pytest.approx((6 * 0.99 - 0.891 - 5) / (2 * (1 - 0.891)))
    with pytest.raises(ValueError):
        two_state_A(1.0, 1.0)


def test_expected_naive_iterate_diverges_as_predicted():
    gamma, lam, alpha = 0.99, 0.9, 0.05
    theta0 = np.array([1.0, 1.0])
    growth, predicted = predicted_divergence_steps(gamma, lam, alpha, theta0, 1e6)
    assert growth == pytest.approx(1 + alpha * two_state_A(gamma, lam)[0, 0])
    assert growth == pytest.approx(1.011239, abs=1e-6)

    mdp, features, pi, mu = make_two_state(gamma)
    model = compute_model(mdp, pi, mu, features, lam, weights=0.5)
    path = expected_iterate(theta0, model, alpha, 2000)
    assert np.all(np.diff(np.abs(path[:, 0])) > 0)
    observed = steps_to_exceed(path[:, :1], 1e6)
    assert abs(observed - predicted) <= 1

    _, none = predicted_divergence_steps(0.5, lam, alpha, theta0, 1e6)
    assert none is None


def test_negative_definiteness():
    mdp, features, _, _ = make_two_state(0.99)
    uniform = TabularPolicy.uniform(2, 2)
    on_policy = compute_model(mdp, uniform, uniform, features, 0.9)
    ok, top = is_negative_definite(on_policy.A)
    assert ok and top < 0
    ok, top = is_negative_definite(two_state_A(0.99, 0.9))
    assert not ok and top > 0


def test_stepsize_gate():
    A = two_state_A(0.9, 0.5)
    norm = operator_norm(A)
    assert norm == pytest.approx(np.linalg.svd(A, compute_uv=False).max())
    assert stepsize_gate(1e-8, 1e-8, A)[0]
    ok, margin = stepsize_gate(2 / norm, 2 / norm, A)
    assert not ok and margin == pytest.approx(-1.0)


def test_gap_bound_corners():
    p = 3
    box = BoxDomain(-np.ones(p), np.ones(p), -np.ones(p), np.ones(p))
    assert gap_bound(box, np.zeros(p), np.zeros(p), 1.0, 1.0, 1) == pytest.approx(p)
    assert gap_bound(box, np.zeros(p), np.zeros(p), 1.0, 1.0, 2) == pytest.approx(p / 2)
    point = BoxDomain(np.ones(p), np.ones(p), np.zeros(p), np.zeros(p))
    assert gap_bound(point, np.ones(p), np.zeros(p), 0.1, 0.1, 5) == 0
    with pytest.raises(ValueError):
        gap_bound(box, np.zeros(p), np.zeros(p), 1.0, 1.0, 0)


def test_gap_vanishes_at_saddle():
    mdp, features, pi, mu = make_two_state(0.99)
    model = compute_model(mdp, pi, mu, features, 0.9)
    box = BoxDomain(-np.ones(2), np.ones(2), -np.ones(2), np.ones(2))
    report = primal_dual_gap(np.zeros(2), np.zeros(2), model, box)
    assert report.gap == pytest.approx(0, abs=1e-14)
    report = primal_dual_gap(np.array([0.5, 0.5]), np.zeros(2), model, box)
    assert report.gap > 0
    assert box.contains(report.theta_argmin, report.omega_argmax)


def saddle_problem(env):
    if env == 'two_state':
        mdp, features, pi, mu = make_two_state(0.99)
        return compute_model(mdp, pi, mu, features, 0.9, weights=0.5)
    mdp, features, pi, mu = make_baird(0.99)
    return compute_model(mdp, pi, mu, features, 0.9)


@pytest.mark.parametrize("env", ["two_state", "baird"])
def test_averaged_expected_iterates_meet_the_gap_bound(env):
    model = saddle_problem(env)
    p = model.dim
    alpha = beta = 0.5 / operator_norm(model.A)
    assert stepsize_gate(alpha, beta, model.A)[0]
    theta0, omega0 = np.ones(p), np.zeros(p)
    thetas, omegas = expected_saddle_iterate(theta0, omega0, model, alpha, beta, 10000)
    box = box_from_iterates(thetas, omegas, include=[(np.zeros(p), np.zeros(p))])
    assert all(box.contains(t, o) for t, o in zip(thetas, omegas))

    for T in (10, 100, 1000, 10000):
        report = primal_dual_gap(thetas[1:T + 1].mean(0), omegas[1:T + 1].mean(0), model, box)
        assert 0 <= report.gap <= gap_bound(box, theta0, omega0, alpha, beta, T)


def test_gap_decays_as_one_over_steps_once_iterates_settle():
    mdp, features, pi, mu = make_two_state(0.99)
    model = compute_model(mdp, pi, mu, features, 0.5, weights=0.5)
    alpha = beta = 0.5 / operator_norm(model.A)
    theta0, omega0 = np.ones(2), np.zeros(2)
    thetas, omegas = expected_saddle_iterate(theta0, omega0, model, alpha, beta, 100000)
    box = box_from_iterates(thetas, omegas, include=[(np.zeros(2), np.zeros(2))])
    steps = np.array([1000, 10000, 100000])
    gaps = [primal_dual_gap(thetas[1:T + 1].mean(0), omegas[1:T + 1].mean(0), model, box).gap for T in steps]
    slope = np.polyfit(np.log(steps), np.log(gaps), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)


def test_empirical_metrics():
    mdp, features, pi, mu = make_two_state(0.9, rewards=[[1.0, 0.0], [0.5, -1.0]])
    model = compute_model(mdp, pi, mu, features, 0.5)
    theta = np.array([0.3, -0.2])
    assert empirical_mspbe(theta, model) == pytest.approx(mspbe_quadratic(theta, model))
    phi = model.phi
    assert empirical_mse(theta, phi, phi @ theta) == 0
    assert empirical_mse(theta, phi, phi @ theta + 2.0, model.xi) == pytest.approx(2.0)

    sampled = estimate_model(mdp, pi, mu, features, 0.5, 0.9, make_rng(0), 50000)
    assert empirical_mspbe(theta, sampled) == pytest.approx(mspbe_quadratic(theta, model), rel=0.2)
    assert empirical_mspbe(theta, sampled) == mspbe_quadratic(theta, sampled)
    with pytest.raises(ShapeError):
        empirical_mspbe(np.zeros(3), sampled)


def test_monte_carlo_values_on_deterministic_chain():
    mdp = make_corridor(3)
    pi = TabularPolicy([[0.0, 1.0]] * 3)
    q = monte_carlo_q(mdp, pi, make_rng(0), n_episodes=3, horizon=10)
    np.testing.assert_allclose(q, exact_q(mdp, pi))
