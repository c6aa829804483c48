import math

import numpy as np

from gesl.envs.two_state import two_state_A, divergence_region
from gesl.analysis.gap import BoxDomain, GapReport, primal_dual_gap, gap_bound, stepsize_gate, box_from_iterates
from gesl.analysis.metrics import empirical_mspbe, empirical_mse, theta_norm, monte_carlo_q, monte_carlo_reference


def operator_norm(matrix):
    return float(np.linalg.norm(np.asarray(matrix, dtype=np.float64), 2))


def is_negative_definite(matrix):
    """Whether ``x^T A x < 0`` for all ``x != 0``, and the largest eigenvalue of the symmetric part."""
    A = np.asarray(matrix, dtype=np.float64)
    top = float(np.linalg.eigvalsh((A + A.T) / 2).max())
    return top < 0, top


def expected_iterate(theta0, model, alpha, steps):
    r"""Path of ``theta_{t+1} = theta_t + alpha (A theta_t + b)``, shape (steps + 1, p)."""
    if alpha <= 0:
        raise ValueError("Invalid learning rate: {}".format(alpha))
    path = np.empty((steps + 1, model.A.shape[1]))
    path[0] = theta0
    with np.errstate(over='ignore', invalid='ignore'):
        for t in range(steps):
            path[t + 1] = path[t] + alpha * (model.A @ path[t] + model.b)
    return path


def expected_saddle_iterate(theta0, omega0, model, alpha, beta, steps):
    r"""
    Simultaneous expected descent-ascent on
    ``theta^T A^T omega + b^T omega - 0.5 omega^T M omega``.

    ``alpha`` and ``beta`` are floats or callables of the step index.
    """
    alpha_t = alpha if callable(alpha) else (lambda t: alpha)
    beta_t = beta if callable(beta) else (lambda t: beta)
    p, k = model.A.shape[1], model.A.shape[0]
    thetas, omegas = np.empty((steps + 1, p)), np.empty((steps + 1, k))
    thetas[0], omegas[0] = theta0, omega0
    for t in range(steps):
        th, om = thetas[t], omegas[t]
        thetas[t + 1] = th - alpha_t(t) * model.A.T @ om
        omegas[t + 1] = om + beta_t(t) * (model.A @ th + model.b - model.M @ om)
    return thetas, omegas


def steps_to_exceed(path, threshold):
    """First index whose norm exceeds ``threshold`` (non-finite counts), or None."""
    norms = np.linalg.norm(path, axis=-1)
    hit = np.flatnonzero(~(norms <= threshold))
    return int(hit[0]) if len(hit) else None


def predicted_divergence_steps(gamma, lam, alpha, theta0, threshold):
    r"""
    Steps until the first coordinate of the expected naive iterate on the
    two-state problem (``Xi = I / 2``) exceeds ``threshold``; None if it does
    not grow.
    """
    growth = 1 + alpha * two_state_A(gamma, lam)[0, 0]
    if growth <= 1 or theta0[0] == 0:
        return growth, None
    return growth, math.ceil(math.log(threshold / abs(theta0[0])) / math.log(growth))
