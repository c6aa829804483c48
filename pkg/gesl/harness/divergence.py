import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from gesl.analysis import (
    two_state_A, divergence_region, is_negative_definite, expected_iterate, steps_to_exceed,
    predicted_divergence_steps,
)
from gesl.common import make_rng
from gesl.envs import make_two_state
from gesl.fa.model import compute_model
from gesl.learners.base import StepSizes
from gesl.learners.gradient import run_ges, run_naive

logger = logging.getLogger(__name__)


@dataclass
class DivergenceReport:
    gamma: float
    lam: float
    alpha: float
    A: np.ndarray
    gamma_threshold: float
    negative_definite: bool
    max_eigenvalue: float
    growth: float
    predicted_steps: Optional[int]
    expected_steps: Optional[int]
    naive_steps: List[Optional[int]] = field(default_factory=list)
    ges_final_norms: List[float] = field(default_factory=list)
    ges_diverged: List[bool] = field(default_factory=list)

    def lines(self):
        yield "A = %s" % np.array2string(self.A, precision=6)
        yield "divergent discounts: gamma > %.6f (gamma = %s)" % (self.gamma_threshold, self.gamma)
        yield "negative definite: %s (largest symmetric eigenvalue %.6f)" % (self.negative_definite, self.max_eigenvalue)
        yield "expected naive growth factor per step: %.6f" % self.growth
        yield "predicted steps to exceed threshold: %s" % self.predicted_steps
        yield "observed steps of the expected iteration: %s" % self.expected_steps
        for i, s in enumerate(self.naive_steps):
            yield "naive seed %d: %s" % (i, "diverged after %d steps" % s if s is not None else "no divergence")
        for i, (n, d) in enumerate(zip(self.ges_final_norms, self.ges_diverged)):
            yield "gradient seed %d: %s, final |theta| = %.4g" % (i, "diverged" if d else "stable", n)


def demo_divergence(cfg) -> DivergenceReport:
    r"""
    The two-state counterexample: the closed-form ``A``, the predicted and
    observed divergence of the expected naive iteration, sampled naive runs
    across seeds and the gradient learner on the same streams.
    """
    d = cfg.divergence
    gamma, lam, alpha = d.gamma, d.lam, d.alpha
    theta0 = np.asarray(d.theta0, dtype=np.float64)
    A = two_state_A(gamma, lam)
    negdef, top = is_negative_definite(A)
    growth, predicted = predicted_divergence_steps(gamma, lam, alpha, theta0, d.threshold)

    mdp, features, pi, mu = make_two_state(gamma)
    model = compute_model(mdp, pi, mu, features, lam, weights=0.5)
    path = expected_iterate(theta0, model, alpha, d.steps)
    observed = steps_to_exceed(path[:, :1], d.threshold)

    report = DivergenceReport(gamma, lam, alpha, A, divergence_region(lam), negdef, top, growth,
                              predicted, observed)
    n_episodes = max(d.steps // cfg.episode_length, 1)
    for seed in range(d.n_seeds):
        record = run_naive(mdp, pi, mu, features, lam, StepSizes(alpha), n_episodes, make_rng(cfg.seed, seed),
                           episode_length=cfg.episode_length, theta0=theta0, divergence_threshold=d.threshold)
        report.naive_steps.append(record.divergence_step if record.diverged else None)
        record = run_ges(mdp, pi, mu, features, lam, StepSizes(alpha, alpha), n_episodes, make_rng(cfg.seed, seed),
                         episode_length=cfg.episode_length, theta0=theta0, divergence_threshold=d.threshold)
        report.ges_final_norms.append(float(np.linalg.norm(record.theta)))
        report.ges_diverged.append(record.diverged)
    logger.info("expected naive iterate exceeded %g after %s steps (predicted %s)", d.threshold, observed, predicted)
    return report
