from dataclasses import dataclass
from typing import Optional

import numpy as np

from gesl.errors import ShapeError, warn_numerical
from gesl.mdp.core import TabularMDP, TabularPolicy, bootstrap_matrix, stationary_distribution
from gesl.returns.operator import apply_lambda_operator

__all__ = ["LinearModel", "compute_model", "mspbe_quadratic", "mspbe_projected", "psd_solve", "saddle_point",
           "projection_matrix", "td_fixed_point"]

_COND = 1e10


def psd_solve(M, y):
    """
    ``M^{-1} y`` for a symmetric PSD ``M``, falling back to the pseudo-inverse
    (with a ``NumericalWarning``) when ``M`` is singular or ill-conditioned.
    """
    if np.linalg.cond(M) < _COND:
        return np.linalg.solve(M, y)
    warn_numerical("Feature covariance is singular; using the pseudo-inverse")
    return np.linalg.pinv(M, rcond=1e-10, hermitian=True) @ y


@dataclass
class LinearModel:
    r"""
    Expected linear system of off-policy evaluation with features ``Phi``::

        A = Phi^T Xi (I - lam gamma P)^{-1} (gamma P_pi Phi - Phi)
        b = Phi^T Xi (I - lam gamma P)^{-1} r
        M = Phi^T Xi Phi
    """
    A: np.ndarray
    b: np.ndarray
    M: np.ndarray
    xi: np.ndarray
    phi: np.ndarray
    lam: float
    gamma: float

    @property
    def dim(self):
        return self.A.shape[1]

    def residual(self, theta):
        return self.A @ theta + self.b

    def mspbe(self, theta):
        return mspbe_quadratic(theta, self)


def compute_model(mdp: TabularMDP, pi: TabularPolicy, mu: TabularPolicy, feature_map, lam,
                  weights=None, trace_policy='pi') -> LinearModel:
    r"""
    Exact ``A``, ``b`` and ``M``.

    Parameters
    ----------
    weights : array_like or float, optional
        Pair weights ``xi``. Default: stationary distribution of ``mu``.
        A scalar gives uniform weights of that value.
    trace_policy : str
        'pi' uses ``P_pi`` in the trace resolvent, 'mu' uses ``P_mu``.
    """
    if not 0 <= lam <= 1:
        raise ValueError("Invalid lambda: {}".format(lam))
    if trace_policy not in ('pi', 'mu'):
        raise ValueError("Invalid trace policy: {}".format(trace_policy))
    Phi = feature_map.matrix(mdp)
    n = mdp.n_pairs
    if weights is None:
        xi = stationary_distribution(mdp, mu)
    else:
        xi = np.broadcast_to(np.asarray(weights, dtype=np.float64), (n,)).copy()
        if (xi < 0).any():
            raise ValueError("Weights must be non-negative")
    P_pi = bootstrap_matrix(mdp, pi)
    P_trace = P_pi if trace_policy == 'pi' else bootstrap_matrix(mdp, mu)
    K = np.eye(n) - lam * mdp.gamma * P_trace
    XiT = Phi.T * xi
    A = XiT @ np.linalg.solve(K, mdp.gamma * P_pi @ Phi - Phi)
    b = XiT @ np.linalg.solve(K, mdp.reward_vector())
    M = XiT @ Phi
    return LinearModel(A, b, M, xi, Phi, lam, mdp.gamma)


def mspbe_quadratic(theta, model: LinearModel):
    r"""``0.5 * (A theta + b)^T M^{-1} (A theta + b)``."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (model.dim,):
        raise ShapeError("Expected theta of dimension %d, got %s" % (model.dim, theta.shape))
    y = model.residual(theta)
    return 0.5 * float(y @ psd_solve(model.M, y))


def mspbe_projected(theta, mdp: TabularMDP, pi: TabularPolicy, mu: TabularPolicy, feature_map, lam,
                    weights=None):
    r"""``0.5 * || Phi theta - Pi B_lam Phi theta ||^2_Xi`` with the Xi-weighted projection Pi."""
    model = compute_model(mdp, pi, mu, feature_map, lam, weights)
    Phi, xi = model.phi, model.xi
    theta = np.asarray(theta, dtype=np.float64)
    q = Phi @ theta
    bq = mdp.to_pairs(apply_lambda_operator(mdp, pi, mdp.from_pairs(q), lam))
    proj = Phi @ psd_solve(model.M, Phi.T @ (xi * bq))
    d = q - proj
    return 0.5 * float(xi @ d ** 2)


def projection_matrix(phi, xi):
    r"""``Phi (Phi^T Xi Phi)^{-1} Phi^T Xi``, the Xi-weighted projection onto span(Phi)."""
    phi = np.asarray(phi, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    if phi.ndim != 2 or xi.shape != (phi.shape[0],):
        raise ShapeError("Expected phi (n, p) and xi (n,), got %s and %s" % (phi.shape, xi.shape))
    XiT = phi.T * xi
    return phi @ psd_solve(XiT @ phi, XiT)


def td_fixed_point(model: LinearModel):
    r"""
    ``theta*`` with ``A theta* + b = 0``. A singular ``A`` gives the
    least-squares minimum-norm solution with a ``NumericalWarning``.
    """
    A = np.atleast_2d(model.A)
    if np.linalg.cond(A) < 1 / np.finfo(np.float64).eps:
        return np.linalg.solve(A, -model.b)
    warn_numerical("A is singular; using the least-squares TD fixed point")
    return np.linalg.lstsq(A, -model.b, rcond=None)[0]


def saddle_point(model: LinearModel, theta=None):
    """
    A saddle point of ``theta^T A^T omega + b^T omega - 0.5 omega^T M omega``:
    ``theta*`` is the TD fixed point and ``omega* = M^{-1}(A theta* + b)``.
    """
    if theta is None:
        theta = td_fixed_point(model)
    omega = psd_solve(model.M, model.residual(theta))
    return theta, omega
