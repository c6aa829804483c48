from dataclasses import dataclass

import numpy as np

from gesl.errors import ShapeError
from gesl.mdp.core import Trajectory, TabularPolicy, ratio_matrix

__all__ = [
    "ReturnConfig", "es_lambda_return_on", "es_lambda_return_off", "es_cv_return_recursive",
    "es_cv_return_forward", "n_step_cv_return", "lambda_mixture_cv_return",
    "sarsa_lambda_return_on", "sarsa_lambda_return_off", "pdis_return", "offline_episode_update",
]


@dataclass(frozen=True)
class ReturnConfig:
    lam: float
    gamma: float

    def __post_init__(self):
        if not 0 <= self.lam <= 1:
            raise ValueError("Invalid lambda: {}".format(self.lam))
        if not 0 < self.gamma <= 1:
            raise ValueError("Invalid gamma: {}".format(self.gamma))


class _Episode:
    """Per-step lookups of a trajectory against a Q-table."""

    def __init__(self, trajectory: Trajectory, q, pi: TabularPolicy, mu: TabularPolicy = None):
        q = np.asarray(q, dtype=np.float64)
        if q.shape != pi.probs.shape:
            raise ShapeError("Q-table shape %s does not match policy %s" % (q.shape, pi.probs.shape))
        s, a = trajectory.states, trajectory.actions
        self.T = trajectory.horizon
        self.r = trajectory.rewards
        self.qbar = pi.expected(q)[s]
        self.qsa = q[s, a]
        if trajectory.terminated:
            self.qbar[-1] = 0
            self.qsa[-1] = 0
        if mu is None:
            self.rho = np.ones(self.T + 1)
        else:
            self.rho = ratio_matrix(pi, mu)[s, a]


def es_lambda_return_on(trajectory, q, config: ReturnConfig, pi):
    return _es(_Episode(trajectory, q, pi), config)


def es_lambda_return_off(trajectory, q, config: ReturnConfig, pi, mu):
    r"""
    Off-policy Expected-Sarsa(lambda) return for every start index::

        G_t = R_{t+1} + gamma * [(1 - lam) Qbar_{t+1} + lam * rho_{t+1} G_{t+1}]

    At the cut ``G_{T-1} = R_T + gamma * Qbar_T``.
    """
    return _es(_Episode(trajectory, q, pi, mu), config)


def _es(ep, config):
    lam, gamma = config.lam, config.gamma
    G = np.empty(ep.T)
    branch = ep.qbar[ep.T] if ep.T else 0.0
    for t in range(ep.T - 1, -1, -1):
        G[t] = ep.r[t] + gamma * ((1 - lam) * ep.qbar[t + 1] + lam * branch)
        branch = ep.rho[t] * G[t]
    return G


def es_cv_return_recursive(trajectory, q, config: ReturnConfig, pi, mu):
    r"""
    Expected-Sarsa(lambda) return with control variates::

        G_t = R_{t+1} + gamma * [(1 - lam) Qbar_{t+1}
                                 + lam * (rho_{t+1} G_{t+1} + Qbar_{t+1} - rho_{t+1} Q_{t+1})]

    with ``G_T = Q_T`` so that the step before the cut reduces to
    ``R_T + gamma * Qbar_T``.
    """
    ep = _Episode(trajectory, q, pi, mu)
    lam, gamma = config.lam, config.gamma
    G = np.empty(ep.T)
    nxt = ep.qsa[ep.T]
    for t in range(ep.T - 1, -1, -1):
        k = t + 1
        G[t] = ep.r[t] + gamma * ((1 - lam) * ep.qbar[k] + lam * (ep.rho[k] * (nxt - ep.qsa[k]) + ep.qbar[k]))
        nxt = G[t]
    return G


def es_cv_return_forward(trajectory, q, config: ReturnConfig, pi, mu):
    r"""
    Forward view ``G_t = Q_t + sum_{l>=t} (gamma lam)^{l-t} rho_{t+1:l} delta_l``
    with ``delta_l = R_{l+1} + gamma Qbar_{l+1} - Q_l``.
    """
    ep = _Episode(trajectory, q, pi, mu)
    lam, gamma = config.lam, config.gamma
    delta = ep.r + gamma * ep.qbar[1:] - ep.qsa[:-1]
    G = np.empty(ep.T)
    for t in range(ep.T):
        acc, coef = ep.qsa[t], 1.0
        for l in range(t, ep.T):
            if l > t:
                coef *= gamma * lam * ep.rho[l]
            acc += coef * delta[l]
        G[t] = acc
    return G


def n_step_cv_return(trajectory, q, gamma, pi, mu, t, n):
    """n-step control-variate return from ``t``; steps past the cut bootstrap with Q_T."""
    ep = _Episode(trajectory, q, pi, mu)
    end = min(t + n, ep.T)
    g = ep.qsa[end]
    for k in range(end - 1, t - 1, -1):
        g = ep.r[k] + gamma * (ep.rho[k + 1] * (g - ep.qsa[k + 1]) + ep.qbar[k + 1])
    return g


def lambda_mixture_cv_return(trajectory, q, config: ReturnConfig, pi, mu):
    """Geometric mixture of n-step control-variate returns for every start index."""
    lam, gamma = config.lam, config.gamma
    T = trajectory.horizon
    G = np.empty(T)
    for t in range(T):
        rest = T - t
        acc = 0.0
        for n in range(1, rest):
            acc += (1 - lam) * lam ** (n - 1) * n_step_cv_return(trajectory, q, gamma, pi, mu, t, n)
        acc += lam ** (rest - 1) * n_step_cv_return(trajectory, q, gamma, pi, mu, t, rest)
        G[t] = acc
    return G


def sarsa_lambda_return_on(trajectory, q, config: ReturnConfig, pi=None):
    ep = _Episode(trajectory, q, pi or TabularPolicy.uniform(*np.shape(q)))
    lam, gamma = config.lam, config.gamma
    G = np.empty(ep.T)
    nxt = ep.qsa[ep.T]
    for t in range(ep.T - 1, -1, -1):
        G[t] = ep.r[t] + gamma * ((1 - lam) * ep.qsa[t + 1] + lam * nxt)
        nxt = G[t]
    return G


def sarsa_lambda_return_off(trajectory, q, config: ReturnConfig, pi, mu):
    """Per-decision importance-sampled Sarsa(lambda) return; the cut uses ``rho_T Q_T``."""
    ep = _Episode(trajectory, q, pi, mu)
    lam, gamma = config.lam, config.gamma
    G = np.empty(ep.T)
    nxt = ep.rho[ep.T] * ep.qsa[ep.T]
    for t in range(ep.T - 1, -1, -1):
        G[t] = ep.rho[t] * (ep.r[t] + gamma * ((1 - lam) * ep.qsa[t + 1] + lam * nxt))
        nxt = G[t]
    return G


def pdis_return(trajectory, config: ReturnConfig, pi, mu):
    """Per-decision importance-sampled discounted reward sum, without bootstrapping."""
    rho = ratio_matrix(pi, mu)[trajectory.states, trajectory.actions]
    T = trajectory.horizon
    G = np.empty(T)
    nxt = 0.0
    for t in range(T - 1, -1, -1):
        G[t] = rho[t] * (trajectory.rewards[t] + config.gamma * nxt)
        nxt = G[t]
    return G


def offline_episode_update(trajectory, q, config: ReturnConfig, pi, mu, alpha, control_variate=True):
    r"""
    Offline lambda-return update at the end of an episode.

    Targets and the increments ``alpha * (G_t - Q(S_t, A_t))`` both use the
    pre-update table, so a pair visited several times receives the sum of its
    increments.
    """
    if alpha < 0:
        raise ValueError("Invalid learning rate: {}".format(alpha))
    fn = es_cv_return_recursive if control_variate else es_lambda_return_off
    G = fn(trajectory, q, config, pi, mu)
    q0 = np.asarray(q, dtype=np.float64)
    q = q0.copy()
    for t in range(trajectory.horizon):
        s, a = trajectory.states[t], trajectory.actions[t]
        q[s, a] += alpha * (G[t] - q0[s, a])
    return q
