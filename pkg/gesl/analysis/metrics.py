import numpy as np

from gesl.fa.model import mspbe_quadratic

__all__ = ["empirical_mspbe", "empirical_mse", "theta_norm", "monte_carlo_q", "monte_carlo_reference"]


def empirical_mspbe(theta, model):
    """MSPBE of ``theta`` under an exact or sampled linear model."""
    return mspbe_quadratic(theta, model)


def empirical_mse(theta, phi, q_ref, weights=None):
    r"""Weighted root-mean-square error ``||Phi theta - q||_Xi`` over the reference pairs."""
    d = phi @ theta - q_ref
    w = np.full(len(d), 1.0 / len(d)) if weights is None else weights / np.sum(weights)
    return float(np.sqrt(w @ d ** 2))


def theta_norm(theta):
    return float(np.linalg.norm(theta))


def _rollout(env, state, action, pi, gamma, rng, horizon):
    g, discount = 0.0, 1.0
    s, a = state, action
    for _ in range(horizon):
        r, s, done = env.step(s, a, rng)
        g += discount * r
        if done:
            break
        discount *= gamma
        a = pi.sample(s, rng)
    return g


def monte_carlo_q(mdp, pi, rng, n_episodes, horizon):
    """Monte-Carlo action values of ``pi`` from ``n_episodes`` rollouts per pair."""
    q = np.zeros((mdp.n_states, mdp.n_actions))
    for s in range(mdp.n_states):
        if mdp.terminal[s]:
            continue
        for a in range(mdp.n_actions):
            q[s, a] = np.mean([_rollout(mdp, s, a, pi, mdp.gamma, rng, horizon) for _ in range(n_episodes)])
    return q


def monte_carlo_reference(env, pi, mu, feature_map, gamma, rng, n_pairs, horizon):
    r"""
    Sample ``n_pairs`` state-action pairs along behavior episodes and estimate
    their values under ``pi`` by a rollout each.

    Returns
    -------
    (phi, q) : features (n_pairs, p) and reference values (n_pairs,)
    """
    phis, qs = [], []
    while len(qs) < n_pairs:
        s = env.reset(rng)
        for _ in range(horizon):
            a = mu.sample(s, rng)
            phis.append(feature_map.phi(s, a))
            qs.append(_rollout(env, s, a, pi, gamma, rng, horizon))
            r, s, done = env.step(s, a, rng)
            if done or len(qs) >= n_pairs:
                break
    return np.stack(phis), np.array(qs)
