from dataclasses import dataclass
from typing import Optional

import numpy as np

from gesl.errors import ShapeError

__all__ = ["BoxDomain", "GapReport", "primal_dual_gap", "gap_bound", "stepsize_gate", "box_from_iterates"]


@dataclass(frozen=True)
class BoxDomain:
    theta_low: np.ndarray
    theta_high: np.ndarray
    omega_low: np.ndarray
    omega_high: np.ndarray

    def __post_init__(self):
        for lo, hi in ((self.theta_low, self.theta_high), (self.omega_low, self.omega_high)):
            if np.shape(lo) != np.shape(hi) or np.any(np.asarray(hi) < np.asarray(lo)):
                raise ShapeError("Box bounds are inconsistent")

    def contains(self, theta, omega):
        return bool(np.all(theta >= self.theta_low) and np.all(theta <= self.theta_high)
                    and np.all(omega >= self.omega_low) and np.all(omega <= self.omega_high))


@dataclass
class GapReport:
    gap: float
    max_value: float
    min_value: float
    omega_argmax: np.ndarray
    theta_argmin: np.ndarray
    bound: Optional[float] = None


def _objective(theta, omega, model):
    return float(theta @ model.A.T @ omega + model.b @ omega - 0.5 * omega @ model.M @ omega)


def _maximize_omega(y, M, low, high, tol=1e-14, max_sweeps=100000):
    """Maximize ``y^T w - 0.5 w^T M w`` over the box by exact coordinate ascent."""
    w = np.clip(np.linalg.lstsq(M, y, rcond=None)[0], low, high)
    for _ in range(max_sweeps):
        change = 0.0
        for i in range(len(w)):
            g = y[i] - M[i] @ w
            if M[i, i] > 0:
                new = np.clip(w[i] + g / M[i, i], low[i], high[i])
            else:
                new = high[i] if g > 0 else low[i]
            change = max(change, abs(new - w[i]))
            w[i] = new
        if change < tol:
            break
    return w


def primal_dual_gap(theta_bar, omega_bar, model, box: BoxDomain) -> GapReport:
    r"""
    ``max_{omega in box} Psi(theta_bar, omega) - min_{theta in box} Psi(theta, omega_bar)``.

    The inner minimum is linear in theta and attained at a corner; the inner
    maximum is a concave quadratic solved by coordinate ascent.
    """
    theta_bar = np.asarray(theta_bar, dtype=np.float64)
    omega_bar = np.asarray(omega_bar, dtype=np.float64)
    y = model.A @ theta_bar + model.b
    w = _maximize_omega(y, model.M, np.asarray(box.omega_low, float), np.asarray(box.omega_high, float))
    g = model.A.T @ omega_bar
    theta = np.where(g > 0, box.theta_low, box.theta_high).astype(np.float64)
    hi = _objective(theta_bar, w, model)
    lo = _objective(theta, omega_bar, model)
    return GapReport(hi - lo, hi, lo, w, theta)


def gap_bound(box: BoxDomain, theta0, omega0, alpha, beta, T):
    r"""``sup_{box} [ ||theta - theta0||^2 / (2 alpha) + ||omega - omega0||^2 / (2 beta) ] / T``."""
    if T < 1:
        raise ValueError("Invalid number of steps: {}".format(T))

    def far(lo, hi, x0):
        return float(np.maximum((np.asarray(lo) - x0) ** 2, (np.asarray(hi) - x0) ** 2).sum())

    return (far(box.theta_low, box.theta_high, theta0) / (2 * alpha)
            + far(box.omega_low, box.omega_high, omega0) / (2 * beta)) / T


def stepsize_gate(alpha, beta, A):
    """``1 - sqrt(alpha beta) ||A||_2``; step sizes are admissible when positive."""
    margin = 1 - np.sqrt(alpha * beta) * np.linalg.norm(A, 2)
    return margin > 0, float(margin)


def box_from_iterates(thetas, omegas, inflate=0.5, include=()):
    """Bounding box of the iterates (and ``include`` points), widened by ``inflate`` of its span per side."""
    thetas = np.vstack([np.atleast_2d(thetas)] + [np.atleast_2d(p[0]) for p in include])
    omegas = np.vstack([np.atleast_2d(omegas)] + [np.atleast_2d(p[1]) for p in include])

    def bounds(x):
        x = x[np.isfinite(x).all(-1)]
        lo, hi = x.min(0), x.max(0)
        pad = inflate * np.maximum(hi - lo, 1e-8)
        return lo - pad, hi + pad

    tl, th = bounds(thetas)
    ol, oh = bounds(omegas)
    return BoxDomain(tl, th, ol, oh)
