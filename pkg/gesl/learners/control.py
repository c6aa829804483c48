from dataclasses import dataclass

import numpy as np

from gesl.mdp.core import TabularMDP, TabularPolicy

__all__ = [
    "epsilon_schedule", "ControlResult", "q_learning_control", "LinearGreedyPolicy", "sarsa_control_fa",
    "rollout_lengths",
]


def epsilon_schedule(epsilon0, decay, k):
    """Exploration rate of episode ``k`` (1-based)."""
    return epsilon0 * decay ** (k - 1)


@dataclass
class ControlResult:
    q: np.ndarray
    policy: object
    lengths: np.ndarray


def q_learning_control(mdp: TabularMDP, rng, n_episodes=150, alpha=0.5, epsilon0=0.2, decay=0.95,
                       max_horizon=10000, q0=None) -> ControlResult:
    r"""
    Tabular Q-learning with epsilon-greedy exploration decayed per episode.
    Returns the greedy policy of the final table.
    """
    if alpha <= 0:
        raise ValueError("Invalid learning rate: {}".format(alpha))
    q = np.zeros((mdp.n_states, mdp.n_actions)) if q0 is None else np.array(q0, dtype=np.float64)
    lengths = []
    for k in range(1, n_episodes + 1):
        eps = epsilon_schedule(epsilon0, decay, k)
        s = mdp.reset(rng)
        t = 0
        while not mdp.terminal[s] and t < max_horizon:
            if rng.random() < eps:
                a = int(rng.integers(mdp.n_actions))
            else:
                a = int(q[s].argmax())
            r, s2, done = mdp.step(s, a, rng)
            target = r if done else r + mdp.gamma * q[s2].max()
            q[s, a] += alpha * (target - q[s, a])
            s = s2
            t += 1
        lengths.append(t)
    return ControlResult(q, TabularPolicy.greedy(q), np.array(lengths, dtype=np.int64))


class LinearGreedyPolicy:
    """Epsilon-greedy policy over linear action values of sparse tile features."""

    def __init__(self, weights, feature_map, epsilon=0.0):
        if not 0 <= epsilon <= 1:
            raise ValueError("Invalid epsilon: {}".format(epsilon))
        self.weights = np.asarray(weights, dtype=np.float64)
        self.feature_map = feature_map
        self.epsilon = epsilon
        self.n_actions = feature_map.n_actions

    def values(self, state):
        return np.array([self.weights[self.feature_map.active(state, a)].sum() for a in range(self.n_actions)])

    def probs_at(self, state):
        probs = np.full(self.n_actions, self.epsilon / self.n_actions)
        probs[int(self.values(state).argmax())] += 1 - self.epsilon
        return probs

    def sample(self, state, rng):
        if self.epsilon > 0 and rng.random() < self.epsilon:
            return int(rng.integers(self.n_actions))
        return int(self.values(state).argmax())

    def with_epsilon(self, epsilon):
        return LinearGreedyPolicy(self.weights, self.feature_map, epsilon)


def sarsa_control_fa(env, feature_map, rng, n_episodes=500, alpha=0.5, epsilon=0.1, max_steps=2000,
                     gamma=None) -> ControlResult:
    r"""
    Semi-gradient Sarsa(0) on binary tile features; ``alpha`` is divided by the
    number of active tiles. Returns the greedy policy of the final weights.
    """
    if alpha <= 0:
        raise ValueError("Invalid learning rate: {}".format(alpha))
    gamma = env.gamma if gamma is None else gamma
    w = np.zeros(feature_map.dim)
    step = alpha / feature_map.config.n_tilings
    policy = LinearGreedyPolicy(w, feature_map, epsilon)
    lengths = []
    for _ in range(n_episodes):
        s = env.reset(rng)
        a = policy.sample(s, rng)
        idx = feature_map.active(s, a)
        t = 0
        while t < max_steps:
            r, s2, done = env.step(s, a, rng)
            t += 1
            if done:
                w[idx] += step * (r - w[idx].sum())
                break
            a2 = policy.sample(s2, rng)
            idx2 = feature_map.active(s2, a2)
            w[idx] += step * (r + gamma * w[idx2].sum() - w[idx].sum())
            s, a, idx = s2, a2, idx2
        lengths.append(t)
    return ControlResult(w, LinearGreedyPolicy(w.copy(), feature_map, 0.0), np.array(lengths, dtype=np.int64))


def rollout_lengths(env, policy, rng, n_episodes=20, max_steps=2000):
    """Steps to termination of ``n_episodes`` rollouts of ``policy``, capped at ``max_steps``."""
    lengths = []
    for _ in range(n_episodes):
        s = env.reset(rng)
        t, done = 0, False
        while not done and t < max_steps:
            _, s, done = env.step(s, policy.sample(s, rng), rng)
            t += 1
        lengths.append(t)
    return np.array(lengths, dtype=np.int64)
