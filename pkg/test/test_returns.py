import numpy as np
import pytest

from gesl.common import make_rng
from gesl.envs import make_two_state, make_windy_gridworld
from gesl.mdp import TabularMDP, TabularPolicy, Trajectory, exact_q, sample_trajectory, bellman_apply, value_iteration
from gesl.returns import (
    ReturnConfig, es_lambda_return_on, es_lambda_return_off, es_cv_return_recursive,
    es_cv_return_forward, lambda_mixture_cv_return, sarsa_lambda_return_on,
    sarsa_lambda_return_off, pdis_return, offline_episode_update, apply_lambda_operator,
    evaluate_policy, contraction_factor, truncated_lambda_mean, mixed_operator_fixed_point,
    variance_recursive,
)


def random_mdp(rng, S=3, A=2, gamma=0.9, deterministic=False):
    if deterministic:
        P = np.zeros((S, A, S))
        P[np.arange(S)[:, None], np.arange(A)[None], rng.integers(0, S, size=(S, A))] = 1
    else:
        P = rng.random((S, A, S))
        P /= P.sum(-1, keepdims=True)
    return TabularMDP(P, rng.normal(size=(S, A)), gamma)


def random_policy(rng, S=3, A=2):
    p = rng.random((S, A)) + 0.1
    return TabularPolicy(p / p.sum(-1, keepdims=True))


def setup(seed, horizon=12, deterministic=False):
    rng = make_rng(seed)
    mdp = random_mdp(rng, deterministic=deterministic)
    pi, mu = random_policy(rng), random_policy(rng)
    q = rng.normal(size=(3, 2))
    traj = sample_trajectory(mdp, mu, rng, max_horizon=horizon)
    return mdp, pi, mu, q, traj


def test_lambda_zero_is_one_step():
    mdp, pi, mu, q, traj = setup(0)
    G = es_lambda_return_off(traj, q, ReturnConfig(0.0, mdp.gamma), pi, mu)
    qbar = pi.expected(q)
    expected = traj.rewards + mdp.gamma * qbar[traj.states[1:]]
    np.testing.assert_allclose(G, expected, atol=1e-12)
    G = es_cv_return_recursive(traj, q, ReturnConfig(0.0, mdp.gamma), pi, mu)
    np.testing.assert_allclose(G, expected, atol=1e-12)


@pytest.mark.parametrize("lam", [0.0, 0.3, 0.8, 1.0])
def test_control_variate_views_agree(lam):
    rng = make_rng(1)
    mdp = random_mdp(rng)
    pi, mu = random_policy(rng), random_policy(rng)
    config = ReturnConfig(lam, mdp.gamma)
    for _ in range(1000):
        q = rng.normal(size=(3, 2))
        traj = sample_trajectory(mdp, mu, rng, max_horizon=12)
        G = es_cv_return_recursive(traj, q, config, pi, mu)
        atol = 1e-12 * (1 + np.abs(G).max())
        np.testing.assert_allclose(es_cv_return_forward(traj, q, config, pi, mu), G, rtol=1e-12, atol=atol)
        np.testing.assert_allclose(lambda_mixture_cv_return(traj, q, config, pi, mu), G, rtol=1e-12, atol=atol)


def test_on_policy_es_matches_off_policy_with_same_policies():
    mdp, pi, _, q, traj = setup(2)
    config = ReturnConfig(0.7, mdp.gamma)
    np.testing.assert_allclose(es_lambda_return_on(traj, q, config, pi),
                               es_lambda_return_off(traj, q, config, pi, pi), atol=1e-12)


def test_sarsa_returns():
    mdp, pi, mu, q, traj = setup(3)
    config = ReturnConfig(1.0, mdp.gamma)
    G = sarsa_lambda_return_on(traj, np.zeros_like(q), config)
    discounts = mdp.gamma ** np.arange(traj.horizon)
    assert abs(G[0] - discounts @ traj.rewards) < 1e-12
    config = ReturnConfig(0.6, mdp.gamma)
    np.testing.assert_allclose(sarsa_lambda_return_off(traj, q, config, pi, pi),
                               sarsa_lambda_return_on(traj, q, config, pi), atol=1e-12)


def test_pdis_on_policy_is_discounted_reward():
    mdp, pi, _, _, traj = setup(4)
    G = pdis_return(traj, ReturnConfig(1.0, mdp.gamma), pi, pi)
    discounts = mdp.gamma ** np.arange(traj.horizon)
    assert abs(G[0] - discounts @ traj.rewards) < 1e-12


def test_zero_target_probability_cuts_the_trace():
    rng = make_rng(5)
    mdp = random_mdp(rng)
    pi = TabularPolicy([[1.0, 0.0]] * 3)
    mu = TabularPolicy.uniform(3, 2)
    traj = sample_trajectory(mdp, mu, rng, max_horizon=30)
    G = sarsa_lambda_return_off(traj, np.zeros((3, 2)), ReturnConfig(1.0, mdp.gamma), pi, mu)
    for t in range(traj.horizon):
        if traj.actions[t] == 1:
            assert G[t] == 0


def test_control_variate_return_is_exact_with_true_values():
    mdp, pi, mu, _, traj = setup(6, deterministic=True)
    q_pi = exact_q(mdp, pi)
    G = es_cv_return_recursive(traj, q_pi, ReturnConfig(0.9, mdp.gamma), pi, mu)
    np.testing.assert_allclose(G, q_pi[traj.states[:-1], traj.actions[:-1]], atol=1e-10)
    q = offline_episode_update(traj, q_pi, ReturnConfig(0.9, mdp.gamma), pi, mu, alpha=0.5)
    np.testing.assert_allclose(q, q_pi, atol=1e-10)


def test_offline_update_zero_step_size():
    mdp, pi, mu, q, traj = setup(7)
    out = offline_episode_update(traj, q, ReturnConfig(0.5, mdp.gamma), pi, mu, alpha=0.0)
    np.testing.assert_array_equal(out, q)


def test_offline_update_uses_pre_update_values():
    mdp = TabularMDP(np.ones((1, 1, 1)), np.ones((1, 1)), 0.9)
    pi = mu = TabularPolicy([[1.0]])
    traj = Trajectory(np.zeros(3, dtype=np.int64), np.zeros(3, dtype=np.int64), np.ones(2))
    q = offline_episode_update(traj, np.zeros((1, 1)), ReturnConfig(0.5, 0.9), pi, mu, alpha=0.5)
    # targets 1.45 and 1.0, both measured from the initial zero
    assert q[0, 0] == pytest.approx(1.225)

    mdp, pi, mu, q, traj = setup(12, horizon=40)
    config = ReturnConfig(0.7, mdp.gamma)
    G = es_cv_return_recursive(traj, q, config, pi, mu)
    expected = q.copy()
    s, a = traj.states[:-1], traj.actions[:-1]
    np.add.at(expected, (s, a), 0.3 * (G - q[s, a]))
    np.testing.assert_allclose(offline_episode_update(traj, q, config, pi, mu, alpha=0.3), expected, atol=1e-12)


def test_invalid_lambda():
    with pytest.raises(ValueError):
        ReturnConfig(1.5, 0.9)
    with pytest.raises(ValueError):
        ReturnConfig(-0.1, 0.9)


def test_lambda_operator():
    rng = make_rng(8)
    mdp = random_mdp(rng)
    pi = random_policy(rng)
    q_pi = exact_q(mdp, pi)
    q0 = rng.normal(size=(3, 2)) * 10
    np.testing.assert_allclose(apply_lambda_operator(mdp, pi, q0, 1.0), q_pi, atol=1e-10)
    np.testing.assert_allclose(apply_lambda_operator(mdp, pi, q0, 0.0), bellman_apply(mdp, pi, q0), atol=1e-12)

    lam = 0.5
    errors = evaluate_policy(mdp, pi, q0, lam, 10)
    c = contraction_factor(mdp.gamma, lam)
    for k in range(1, len(errors)):
        assert errors[k] <= c ** k * errors[0] + 1e-12


def evaluation_problems():
    rng = make_rng(13)
    for _ in range(10):
        yield random_mdp(rng, S=5, gamma=0.95), random_policy(rng, S=5), rng.normal(size=(5, 2)) * 10
    mdp = make_windy_gridworld()
    pi = value_iteration(mdp)[1]
    yield mdp, pi, rng.normal(size=(mdp.n_states, mdp.n_actions)) * 10


def test_policy_evaluation_contracts():
    for mdp, pi, q0 in evaluation_problems():
        assert evaluate_policy(mdp, pi, q0, 1.0, 1)[1] <= 1e-10
        for lam in (0.0, 0.5, 0.9):
            errors = evaluate_policy(mdp, pi, q0, lam, 20)
            c = contraction_factor(mdp.gamma, lam)
            for k in range(1, 21):
                assert errors[k] <= c ** k * errors[0] + 1e-10


def test_mixed_operator_is_biased_away_from_target():
    mdp, features, pi, mu = make_two_state(0.9, rewards=[[1.0, -0.5], [0.3, 2.0]])
    q_pi = exact_q(mdp, pi)
    assert np.abs(mixed_operator_fixed_point(mdp, pi, mu, 0.5) - q_pi).max() > 1e-6
    np.testing.assert_allclose(apply_lambda_operator(mdp, pi, q_pi, 0.5), q_pi, atol=1e-10)


def test_mixed_operator_endpoints():
    rng = make_rng(9)
    mdp = random_mdp(rng)
    pi, mu = random_policy(rng), random_policy(rng)
    np.testing.assert_allclose(mixed_operator_fixed_point(mdp, pi, mu, 0.0), exact_q(mdp, pi), atol=1e-10)
    np.testing.assert_allclose(mixed_operator_fixed_point(mdp, pi, mu, 1.0), exact_q(mdp, mu), atol=1e-10)


@pytest.mark.parametrize("control_variate", [True, False])
def test_truncated_mean_matches_exact_moments(control_variate):
    rng = make_rng(10)
    mdp = random_mdp(rng)
    pi, mu = random_policy(rng), random_policy(rng)
    q = rng.normal(size=(3, 2))
    lam, H = 0.8, 4
    report = variance_recursive(mdp, pi, mu, q, lam, H, control_variate=control_variate)
    for t in range(H + 1):
        expected = truncated_lambda_mean(mdp, pi, q, lam, H - t)
        np.testing.assert_allclose(report.mean[t], expected, atol=1e-10)


def test_monte_carlo_mean_of_control_variate_return():
    rng = make_rng(11)
    mdp = random_mdp(rng)
    pi, mu = random_policy(rng), random_policy(rng)
    q = rng.normal(size=(3, 2))
    lam, H, n = 1.0, 3, 20000
    config = ReturnConfig(lam, mdp.gamma)
    samples = np.array([
        es_cv_return_recursive(sample_trajectory(mdp, mu, rng, H + 1, start_state=0, start_action=1),
                               q, config, pi, mu)[0]
        for _ in range(n)
    ])
    report = variance_recursive(mdp, pi, mu, q, lam, H)
    sd = np.sqrt(report.total[0, 0, 1] / n)
    assert abs(samples.mean() - report.mean[0, 0, 1]) < 5 * sd + 1e-12
