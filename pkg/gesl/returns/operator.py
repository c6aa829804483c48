import numpy as np

from gesl.errors import NumericalError
from gesl.mdp.core import TabularMDP, TabularPolicy, bootstrap_matrix, exact_q

__all__ = [
    "contraction_factor", "apply_lambda_operator", "evaluate_policy",
    "truncated_lambda_mean", "mixed_operator_fixed_point",
]


def contraction_factor(gamma, lam):
    return (gamma - lam * gamma) / (1 - lam * gamma)


def _check_lam(mdp, lam):
    if not 0 <= lam <= 1:
        raise ValueError("Invalid lambda: {}".format(lam))


def apply_lambda_operator(mdp: TabularMDP, pi: TabularPolicy, q, lam):
    r"""
    ``B_lam q = q + (I - lam gamma P_pi)^{-1} (B_pi q - q)``.

    Raises
    ------
    NumericalError
        If ``I - lam gamma P_pi`` is singular (``lam gamma = 1`` on a chain
        without reachable terminal states).
    """
    _check_lam(mdp, lam)
    P = bootstrap_matrix(mdp, pi)
    qv = mdp.to_pairs(q)
    d = mdp.reward_vector() + mdp.gamma * P @ qv - qv
    M = np.eye(mdp.n_pairs) - lam * mdp.gamma * P
    if np.linalg.cond(M) > 1e12:
        raise NumericalError("I - lam * gamma * P is singular")
    return mdp.from_pairs(qv + np.linalg.solve(M, d))


def evaluate_policy(mdp: TabularMDP, pi: TabularPolicy, q0, lam, k_iters):
    """Sup-norm errors to ``q_pi`` of ``q0, B q0, ..., B^k q0``."""
    q_pi = exact_q(mdp, pi)
    q = np.asarray(q0, dtype=np.float64)
    errors = [np.abs(q - q_pi).max()]
    for _ in range(k_iters):
        q = apply_lambda_operator(mdp, pi, q, lam)
        errors.append(np.abs(q - q_pi).max())
    return np.array(errors)


def truncated_lambda_mean(mdp: TabularMDP, pi: TabularPolicy, q, lam, depth):
    r"""
    Exact mean of the expected-Sarsa returns (with or without control
    variates) whose lambda-branch is cut ``depth`` steps after the start::

        q + sum_{k=0}^{depth} (lam gamma P_pi)^k (B_pi q - q)
    """
    _check_lam(mdp, lam)
    P = bootstrap_matrix(mdp, pi)
    qv = mdp.to_pairs(q)
    term = mdp.reward_vector() + mdp.gamma * P @ qv - qv
    acc = term.copy()
    for _ in range(depth):
        term = lam * mdp.gamma * P @ term
        acc += term
    return mdp.from_pairs(qv + acc)


def mixed_operator_fixed_point(mdp: TabularMDP, pi: TabularPolicy, mu: TabularPolicy, lam):
    """Fixed point of ``(1 - lam) B_pi + lam B_mu``."""
    _check_lam(mdp, lam)
    P = (1 - lam) * bootstrap_matrix(mdp, pi) + lam * bootstrap_matrix(mdp, mu)
    M = np.eye(mdp.n_pairs) - mdp.gamma * P
    if np.linalg.cond(M) > 1e12:
        raise NumericalError("Mixed operator has no unique fixed point")
    return mdp.from_pairs(np.linalg.solve(M, mdp.reward_vector()))
