from typing import NamedTuple

import numpy as np

from gesl.fa.model import LinearModel
from gesl.mdp.core import importance_ratio

__all__ = ["Transition", "EligibilityTrace", "trace_step", "sample_estimates", "estimate_model"]


class Transition(NamedTuple):
    state: object
    action: int
    reward: float
    next_state: object
    done: bool


def trace_step(trace, rho, phi, lam, gamma):
    """``e_t = lam gamma rho_t e_{t-1} + phi_t``; works on arrays and tensors alike."""
    return lam * gamma * rho * trace + phi


class EligibilityTrace:

    def __init__(self, zeros):
        self.e = zeros

    def reset(self):
        self.e = self.e * 0

    def step(self, rho, phi, lam, gamma):
        self.e = trace_step(self.e, rho, phi, lam, gamma)
        return self.e


def sample_estimates(trace, phi, reward, expected_next_phi, gamma):
    r"""Single-sample ``A_t = e_t (gamma E phi' - phi)^T``, ``b_t = R e_t`` and ``M_t = phi phi^T``."""
    A = np.outer(trace, gamma * expected_next_phi - phi)
    b = reward * trace
    M = np.outer(phi, phi)
    return A, b, M


def estimate_model(env, pi, mu, feature_map, lam, gamma, rng, n_steps, episode_length=None):
    """
    Monte-Carlo average of the single-sample estimates along the behavior
    chain. Traces reset at the start of every episode.
    """
    p = feature_map.dim
    A, b, M = np.zeros((p, p)), np.zeros(p), np.zeros((p, p))
    trace = EligibilityTrace(np.zeros(p))
    steps = 0
    while steps < n_steps:
        s = env.reset(rng)
        trace.reset()
        t, done = 0, False
        while not done and steps < n_steps and (episode_length is None or t < episode_length):
            a = mu.sample(s, rng)
            rho = importance_ratio(pi, mu, s, a)
            phi = feature_map.phi(s, a)
            e = trace.step(rho, phi, lam, gamma)
            r, s2, done = env.step(s, a, rng)
            ephi = np.zeros(p) if done else feature_map.expected_phi(s2, pi)
            At, bt, Mt = sample_estimates(e, phi, r, ephi, gamma)
            A += At
            b += bt
            M += Mt
            s = s2
            t += 1
            steps += 1
    n = max(steps, 1)
    return LinearModel(A / n, b / n, M / n, None, None, lam, gamma)
