import numpy as np
import pytest
import torch

from gesl.common import make_rng
from gesl.envs import make_two_state, make_corridor, make_windy_gridworld, make_mountain_car
from gesl.fa import TileFeatures, Transition, compute_model
from gesl.learners import (
    StepSizes, GradientExpectedSarsa, NaiveExpectedSarsa, run_ges, run_naive, get_learner,
    tabular_escv_learn, tabular_es_learn, q_learning_control, sarsa_control_fa, epsilon_schedule, rollout_lengths,
)
from gesl.mdp import TabularPolicy, exact_q
from gesl.train import RunRecord, StepSizeLR, schedule_factor
from gesl.train.metrics import MSPBE, ThetaNorm


def expected_direction(learner, mdp, xi):
    """Direction averaged over (s, a) ~ xi and s' ~ P(.|s, a); valid for lam = 0."""
    g_theta = np.zeros(learner.feature_map.dim)
    g_omega = np.zeros(learner.feature_map.dim)
    for k, (s, a) in enumerate(mdp.pairs):
        for s2 in np.flatnonzero(mdp.P[s, a]):
            learner.direction(Transition(int(s), int(a), mdp.R[s, a], int(s2), False))
            w = xi[k] * mdp.P[s, a, s2]
            g_theta += w * learner.theta.grad.numpy()
            if learner.omega is not None:
                g_omega += w * learner.omega.grad.numpy()
    return g_theta, g_omega


def test_gradient_direction_is_unbiased():
    mdp, features, pi, mu = make_two_state(0.9, rewards=[[1.0, -0.5], [0.3, 2.0]])
    model = compute_model(mdp, pi, mu, features, 0.0)
    theta0, omega0 = np.array([0.3, -1.2]), np.array([0.7, 0.4])
    learner = GradientExpectedSarsa(features, pi, mu, 0.0, 0.9, StepSizes(0.1, 0.1), theta0, omega0)
    g_theta, g_omega = expected_direction(learner, mdp, model.xi)
    np.testing.assert_allclose(g_theta, model.A.T @ omega0, atol=1e-12)
    np.testing.assert_allclose(g_omega, model.M @ omega0 - model.residual(theta0), atol=1e-12)


def test_naive_direction_is_expected_td_update():
    mdp, features, pi, mu = make_two_state(0.9, rewards=[[1.0, -0.5], [0.3, 2.0]])
    model = compute_model(mdp, pi, mu, features, 0.0)
    theta0 = np.array([0.3, -1.2])
    learner = NaiveExpectedSarsa(features, pi, mu, 0.0, 0.9, StepSizes(0.1), theta0)
    g_theta, _ = expected_direction(learner, mdp, model.xi)
    np.testing.assert_allclose(g_theta, -model.residual(theta0), atol=1e-12)


def test_step_applies_scheduled_step_sizes():
    mdp, features, pi, mu = make_two_state(0.9, rewards=[[1.0, 0.0], [0.0, 0.0]])
    learner = NaiveExpectedSarsa(features, pi, mu, 0.0, 0.9, StepSizes(0.5, schedule='inv'))
    transition = Transition(0, 0, 1.0, 1, False)
    learner.step(transition)
    # delta = 1 at theta = 0, phi = (1, 0)
    np.testing.assert_allclose(learner.theta.detach().numpy(), [0.5, 0.0])
    assert learner.optimizer.param_groups[0]['lr'] == pytest.approx(0.5 * schedule_factor('inv', 1))
    assert learner.state.t == 1


def test_averages_match_iterates():
    mdp, features, pi, mu = make_two_state(0.99)
    record = run_ges(mdp, pi, mu, features, 0.5, StepSizes(0.05, 0.05), 5, make_rng(0),
                     episode_length=20, theta0=[1.0, 1.0], keep_iterates=True)
    assert record.iterates.shape == (101, 2)
    np.testing.assert_allclose(record.theta_bar, record.iterates[1:].mean(0), atol=1e-12)
    np.testing.assert_allclose(record.omega_bar, record.omega_iterates[1:].mean(0), atol=1e-12)
    np.testing.assert_allclose(record.theta, record.iterates[-1])


def test_zero_episodes_returns_initial_state():
    mdp, features, pi, mu = make_two_state()
    model = compute_model(mdp, pi, mu, features, 0.9)
    record = run_ges(mdp, pi, mu, features, 0.9, StepSizes(0.05, 0.05), 0, make_rng(0),
                     theta0=[1.0, -1.0], metrics={'mspbe': MSPBE(model), 'theta_norm': ThetaNorm()})
    assert record.n_episodes == 0
    np.testing.assert_allclose(record.theta_bar, [1.0, -1.0])
    assert record.metric('mspbe')[0] == pytest.approx(model.mspbe(np.array([1.0, -1.0])))
    assert record.metric('theta_norm')[0] == pytest.approx(np.sqrt(2))


def test_runs_are_reproducible():
    mdp, features, pi, mu = make_two_state()
    model = compute_model(mdp, pi, mu, features, 0.5)
    records = [run_ges(mdp, pi, mu, features, 0.5, StepSizes(0.05, 0.05), 10, make_rng(4),
                       theta0=[1.0, 1.0], metrics={'mspbe': MSPBE(model)}) for _ in range(2)]
    np.testing.assert_array_equal(records[0].metric('mspbe'), records[1].metric('mspbe'))
    np.testing.assert_array_equal(records[0].theta, records[1].theta)
    assert len(records[0].rows) == 11


def test_naive_diverges_on_two_state():
    mdp, features, pi, mu = make_two_state(0.99)
    diverged = []
    for seed in range(20):
        record = run_naive(mdp, pi, mu, features, 0.9, StepSizes(0.05), 100, make_rng(seed),
                           episode_length=1000, theta0=[1.0, 1.0], divergence_threshold=1e6)
        diverged.append(record.diverged)
        if record.diverged:
            assert record.divergence_step <= 100000
            assert np.isnan(record.rows[-1].get('mspbe', np.nan))
    assert sum(diverged) >= 19


def test_gradient_learner_converges_without_traces():
    mdp, features, pi, mu = make_two_state(0.99)
    record = run_ges(mdp, pi, mu, features, 0.0, StepSizes(0.05, 0.05), 200, make_rng(0),
                     episode_length=100, theta0=[1.0, 1.0])
    assert not record.diverged
    assert np.linalg.norm(record.theta) < 0.5 * np.sqrt(2)


def test_gradient_learner_converges_with_traces():
    mdp, features, pi, mu = make_two_state(0.99)
    model = compute_model(mdp, pi, mu, features, 0.5)
    finals = []
    for seed in range(5):
        record = run_ges(mdp, pi, mu, features, 0.5, StepSizes(0.01, 0.01), 30, make_rng(seed),
                         episode_length=100, theta0=[0.0, 1.0], metrics={'mspbe': MSPBE(model)})
        assert not record.diverged
        mspbe = record.metric('mspbe')
        finals.append(mspbe[-1] / mspbe[0])
    assert np.median(finals) < 0.05


def test_learner_validation():
    mdp, features, pi, mu = make_two_state()
    with pytest.raises(ValueError):
        StepSizes(0.0)
    with pytest.raises(ValueError):
        StepSizes(0.1, schedule='cosine')
    with pytest.raises(ValueError):
        GradientExpectedSarsa(features, pi, mu, 1.5, 0.9, StepSizes(0.1, 0.1))
    with pytest.raises(ValueError):
        GradientExpectedSarsa(features, pi, mu, 0.5, 0.9, StepSizes(0.1, 0.1), theta0=[1.0])
    with pytest.raises(ValueError):
        get_learner('gtd2')
    assert get_learner('ges') is GradientExpectedSarsa


def test_step_size_scheduler():
    theta = torch.nn.Parameter(torch.zeros(1))
    optimizer = torch.optim.SGD([theta], lr=0.4)
    scheduler = StepSizeLR(optimizer, 'inv_sqrt')
    for _ in range(3):
        optimizer.step()
        scheduler.step()
    assert optimizer.param_groups[0]['lr'] == pytest.approx(0.4 * schedule_factor('inv_sqrt', 3))
    with pytest.raises(ValueError):
        StepSizeLR(optimizer, 'cosine')


def test_q_learning_solves_corridor():
    mdp = make_corridor(3)
    result = q_learning_control(mdp, make_rng(0), n_episodes=50, alpha=0.5)
    np.testing.assert_array_equal(result.policy.probs[:2].argmax(-1), [1, 1])
    np.testing.assert_allclose(result.q[:2, 1], [-2.0, -1.0], atol=1e-3)
    assert epsilon_schedule(0.2, 0.5, 3) == pytest.approx(0.05)


def test_tabular_learners_on_exact_values():
    mdp = make_corridor(3, gamma=0.9)
    pi = TabularPolicy([[0.0, 1.0]] * 3)
    mu = TabularPolicy([[0.3, 0.7]] * 3)
    q_pi = exact_q(mdp, pi)
    result = tabular_escv_learn(mdp, pi, mu, 0.9, 0.5, 3, make_rng(0), q0=q_pi)
    np.testing.assert_allclose(result.values, q_pi[0, 1], atol=1e-12)
    assert len(result.values) == 4
    # without control variates only the on-policy return is exact sample by sample
    result = tabular_es_learn(mdp, pi, pi, 0.9, 0.5, 3, make_rng(0), q0=q_pi)
    np.testing.assert_allclose(result.values, q_pi[0, 1], atol=1e-12)


@pytest.fixture(scope="module")
def windy_policies():
    mdp = make_windy_gridworld()
    control = q_learning_control(mdp, make_rng(0), n_episodes=150, alpha=0.5)
    pi = control.policy
    mu = TabularPolicy.epsilon_greedy(control.q, 0.2)
    value = float(mdp.initial @ pi.expected(exact_q(mdp, pi)))
    return mdp, pi, mu, value


def test_windy_control_variates_reduce_spread(windy_policies):
    mdp, pi, mu, value = windy_policies
    finals = {}
    for fn in (tabular_escv_learn, tabular_es_learn):
        runs = np.stack([fn(mdp, pi, mu, 0.95, 0.5, 150, make_rng(0, run)).values for run in range(20)])
        finals[fn] = runs[:, -50:]
    cv, plain = finals[tabular_escv_learn], finals[tabular_es_learn]
    # the greedy policy follows the 15-step shortest path
    assert value == pytest.approx(-(1 - mdp.gamma ** 15) / (1 - mdp.gamma), abs=1e-8)
    assert abs(cv.mean() - value) < 2
    assert abs(plain.mean() - value) < 4
    assert cv.std(0, ddof=1).mean() < plain.std(0, ddof=1).mean()


def test_mountain_car_control_improves():
    env, config = make_mountain_car()
    features = TileFeatures(config, env.n_actions)
    result = sarsa_control_fa(env, features, make_rng(0), n_episodes=50, alpha=0.5, epsilon=0.0)
    assert result.lengths[-10:].mean() < result.lengths[:10].mean()
    assert result.policy.epsilon == 0.0


def test_mountain_car_greedy_policy_reaches_the_goal():
    env, config = make_mountain_car()
    features = TileFeatures(config, env.n_actions)
    result = sarsa_control_fa(env, features, make_rng(0), n_episodes=500)
    lengths = rollout_lengths(env, result.policy, make_rng(1), n_episodes=20)
    assert np.median(lengths) < 300


def test_run_record_csv(tmp_path):
    mdp, features, pi, mu = make_two_state(0.99)
    model = compute_model(mdp, pi, mu, features, 0.9)
    metrics = {'mspbe': MSPBE(model), 'theta_norm': ThetaNorm()}
    record = run_naive(mdp, pi, mu, features, 0.9, StepSizes(0.05), 20, make_rng(0), episode_length=1000,
                       theta0=[1.0, 1.0], divergence_threshold=1e6, metrics=metrics)
    assert record.diverged
    fp = record.to_csv(tmp_path / 'run.csv')
    assert fp.read_text().splitlines()[0] == 'episode,mspbe,mse,theta_norm,diverged'
    loaded = RunRecord.from_csv(fp)
    assert loaded.diverged and loaded.n_episodes == record.n_episodes
    np.testing.assert_array_equal(loaded.metric('theta_norm'), record.metric('theta_norm'))
    assert np.isnan(loaded.metric('mse')).all()
