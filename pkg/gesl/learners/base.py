from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
import torch.nn as nn
from torch.optim import SGD

from gesl.common import DTYPE, to_tensor, to_numpy
from gesl.fa.trace import EligibilityTrace, Transition
from gesl.mdp.core import importance_ratio
from gesl.train.lr_scheduler import StepSizeLR, SCHEDULES
from gesl.train.record import RunRecord

__all__ = ["StepSizes", "LearnerState", "RunRecord", "EpisodeStats", "Learner",
           "register_learner", "get_learner", "LEARNERS"]

LEARNERS = {}


def register_learner(name):
    def wrap(cls):
        LEARNERS[name] = cls
        cls.name = name
        return cls
    return wrap


def get_learner(name):
    try:
        return LEARNERS[name]
    except KeyError:
        raise ValueError("Unknown learner: {}, available: {}".format(name, sorted(LEARNERS)))


@dataclass(frozen=True)
class StepSizes:
    alpha: float
    beta: float = 0.0
    schedule: str = 'constant'

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("Invalid learning rate: {}".format(self.alpha))
        if not self.beta >= 0:
            raise ValueError("Invalid learning rate: {}".format(self.beta))
        if self.schedule not in SCHEDULES:
            raise ValueError("Unknown step-size schedule: {}".format(self.schedule))

    @classmethod
    def from_ratio(cls, alpha, ratio, schedule='constant'):
        return cls(alpha, alpha * ratio, schedule)

    def at(self, t):
        f = SCHEDULES[self.schedule](t)
        return self.alpha * f, self.beta * f


@dataclass
class LearnerState:
    theta: torch.Tensor
    omega: Optional[torch.Tensor]
    trace: EligibilityTrace
    t: int = 0
    episode: int = 0
    theta_sum: Optional[torch.Tensor] = None
    omega_sum: Optional[torch.Tensor] = None


@dataclass
class EpisodeStats:
    steps: int
    diverged: bool


class Learner:
    r"""
    Linear off-policy evaluation learner updated by ``torch.optim.SGD``.

    ``theta`` (and ``omega`` for saddle-point learners) are float64 parameters
    whose gradients are assigned from the sampled update direction; the
    optimizer applies them with step sizes scheduled by ``StepSizeLR``.
    """
    name = None
    uses_omega = False

    def __init__(self, feature_map, pi, mu, lam, gamma, step_sizes: StepSizes,
                 theta0=None, omega0=None, divergence_threshold=1e8, keep_iterates=False):
        if not 0 <= lam <= 1:
            raise ValueError("Invalid lambda: {}".format(lam))
        self.feature_map = feature_map
        self.pi = pi
        self.mu = mu
        self.lam = lam
        self.gamma = gamma
        self.step_sizes = step_sizes
        self.divergence_threshold = divergence_threshold
        self.keep_iterates = keep_iterates

        p = feature_map.dim
        self.theta = nn.Parameter(self._init(theta0, p))
        params = [{'params': [self.theta], 'lr': step_sizes.alpha}]
        if self.uses_omega:
            self.omega = nn.Parameter(self._init(omega0, p))
            params.append({'params': [self.omega], 'lr': step_sizes.beta})
        else:
            self.omega = None
        self.optimizer = SGD(params, lr=step_sizes.alpha)
        self.lr_scheduler = StepSizeLR(self.optimizer, step_sizes.schedule)
        self.state = LearnerState(
            self.theta.data, self.omega.data if self.omega is not None else None,
            EligibilityTrace(torch.zeros(p, dtype=DTYPE)),
            theta_sum=torch.zeros(p, dtype=DTYPE),
            omega_sum=torch.zeros(p, dtype=DTYPE) if self.uses_omega else None)
        self._iterates = [to_numpy(self.theta)] if keep_iterates else None
        self._omega_iterates = [to_numpy(self.omega)] if keep_iterates and self.uses_omega else None

    @staticmethod
    def _init(x0, p):
        if x0 is None:
            return torch.zeros(p, dtype=DTYPE)
        x0 = to_tensor(np.asarray(x0, dtype=np.float64)).clone()
        if x0.shape != (p,):
            raise ValueError("Expected an initial vector of dimension %d, got %s" % (p, tuple(x0.shape)))
        return x0

    def features(self, transition: Transition):
        phi = to_tensor(self.feature_map.phi(transition.state, transition.action))
        if transition.done:
            ephi = torch.zeros_like(phi)
        else:
            ephi = to_tensor(self.feature_map.expected_phi(transition.next_state, self.pi))
        rho = importance_ratio(self.pi, self.mu, transition.state, transition.action)
        return phi, ephi, rho

    def direction(self, transition: Transition):
        """Assign ``.grad`` of the parameters for the sampled transition."""
        raise NotImplementedError

    def step(self, transition: Transition):
        """One update; returns True once the iterate has diverged."""
        self.direction(transition)
        self.optimizer.step()
        self.lr_scheduler.step()
        st = self.state
        st.t += 1
        with torch.no_grad():
            st.theta_sum += self.theta
            if self.omega is not None:
                st.omega_sum += self.omega
        if self._iterates is not None:
            self._iterates.append(to_numpy(self.theta))
            if self._omega_iterates is not None:
                self._omega_iterates.append(to_numpy(self.omega))
        return self.diverged()

    def diverged(self):
        with torch.no_grad():
            for x in (self.theta, self.omega):
                if x is not None and (not torch.isfinite(x).all() or x.norm() > self.divergence_threshold):
                    return True
        return False

    def run_episode(self, env, rng, max_steps) -> EpisodeStats:
        s = env.reset(rng)
        self.state.trace.reset()
        self.state.episode += 1
        for t in range(max_steps):
            a = self.mu.sample(s, rng)
            r, s2, done = env.step(s, a, rng)
            if self.step(Transition(s, a, r, s2, done)):
                return EpisodeStats(t + 1, True)
            if done:
                return EpisodeStats(t + 1, False)
            s = s2
        return EpisodeStats(max_steps, False)

    def output(self):
        return {
            'theta': to_numpy(self.theta),
            'omega': to_numpy(self.omega) if self.omega is not None else None,
            't': self.state.t,
        }

    def averages(self):
        st = self.state
        if st.t == 0:
            theta_bar = to_numpy(self.theta)
            omega_bar = to_numpy(self.omega) if self.omega is not None else None
        else:
            theta_bar = to_numpy(st.theta_sum) / st.t
            omega_bar = to_numpy(st.omega_sum) / st.t if st.omega_sum is not None else None
        return theta_bar, omega_bar

    def iterates(self):
        if self._iterates is None:
            return None, None
        om = np.stack(self._omega_iterates) if self._omega_iterates is not None else None
        return np.stack(self._iterates), om

    def __repr__(self):
        return "%s(dim=%d, lam=%s, gamma=%s, step_sizes=%s)" % (
            type(self).__name__, self.feature_map.dim, self.lam, self.gamma, self.step_sizes)
