from dataclasses import dataclass

import numpy as np

from gesl.learners.base import register_learner
from gesl.mdp.core import TabularMDP, TabularPolicy, sample_trajectory
from gesl.returns.tabular import ReturnConfig, offline_episode_update

__all__ = ["TabularRunResult", "tabular_escv_learn", "tabular_es_learn"]


@dataclass
class TabularRunResult:
    """``values[k]`` is the start-state value estimate after ``k`` episodes."""
    values: np.ndarray
    q: np.ndarray
    lengths: np.ndarray


@register_learner('tabular_escv')
def tabular_escv_learn(mdp: TabularMDP, pi: TabularPolicy, mu: TabularPolicy, lam, alpha, n_episodes, rng,
                       control_variate=True, q0=None, max_horizon=1000) -> TabularRunResult:
    r"""
    Offline tabular Expected-Sarsa(lambda) evaluation of ``pi`` from episodes of ``mu``.
    Episodes that reach ``max_horizon`` are cut and bootstrapped.
    """
    if alpha < 0:
        raise ValueError("Invalid learning rate: {}".format(alpha))
    config = ReturnConfig(lam, mdp.gamma)
    q = np.zeros((mdp.n_states, mdp.n_actions)) if q0 is None else np.array(q0, dtype=np.float64)
    q[mdp.terminal] = 0
    start = mdp.initial

    def value(q):
        return float(start @ pi.expected(q))

    values, lengths = [value(q)], []
    for _ in range(n_episodes):
        traj = sample_trajectory(mdp, mu, rng, max_horizon)
        q = offline_episode_update(traj, q, config, pi, mu, alpha, control_variate)
        values.append(value(q))
        lengths.append(traj.horizon)
    return TabularRunResult(np.array(values), q, np.array(lengths, dtype=np.int64))


@register_learner('tabular_es')
def tabular_es_learn(mdp, pi, mu, lam, alpha, n_episodes, rng, **kwargs) -> TabularRunResult:
    return tabular_escv_learn(mdp, pi, mu, lam, alpha, n_episodes, rng, control_variate=False, **kwargs)
