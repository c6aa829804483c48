import numpy as np

from gesl.fa.features import TabularFeatures
from gesl.mdp.core import TabularMDP, TabularPolicy

RIGHT, LEFT = 0, 1

# pair order (1, right), (2, right), (1, left), (2, left)
PAIR_ORDER = [(0, RIGHT), (1, RIGHT), (0, LEFT), (1, LEFT)]
FEATURES = [[1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [0.0, 2.0]]


def make_two_state(gamma=0.99, rewards=None, mu_right=0.5):
    r"""
    Two states, two actions. ``right`` moves to the second state and ``left``
    to the first from either state. The target policy always moves right.

    Returns
    -------
    (mdp, features, pi, mu)
    """
    P = np.zeros((2, 2, 2))
    P[:, RIGHT, 1] = 1
    P[:, LEFT, 0] = 1
    R = np.zeros((2, 2)) if rewards is None else np.asarray(rewards, dtype=np.float64)
    mdp = TabularMDP(P, R, gamma, pair_order=PAIR_ORDER, name='two_state')
    features = TabularFeatures.from_pairs(mdp, FEATURES)
    pi = TabularPolicy([[1.0, 0.0], [1.0, 0.0]])
    mu = TabularPolicy([[mu_right, 1 - mu_right]] * 2)
    return mdp, features, pi, mu


def two_state_A(gamma, lam):
    r"""
    Closed-form ``A`` of the two-state problem with ``Xi = I / 2``.

    ``A11``, ``A12`` and ``A22`` are rational in (gamma, lam); the ``A21`` entry
    carries the trace contribution of the left pairs, which reduces to
    ``3 gamma / 2`` at ``lam = 0``.
    """
    if not 0 <= lam <= 1 or not 0 < gamma <= 1 or lam * gamma >= 1:
        raise ValueError("Invalid (gamma, lambda): ({}, {})".format(gamma, lam))
    gl = gamma * lam
    a11 = (6 * gamma - gl - 5) / (2 * (1 - gl))
    a21 = 1.5 * (gamma + gl * (2 * gamma - 1 - gl) / (1 - gl))
    return np.array([[a11, 0.0], [a21, -2.5]])


def divergence_region(lam):
    """Discounts above ``5 / (6 - lam)`` make the expected naive iteration diverge."""
    if not 0 <= lam <= 1:
        raise ValueError("Invalid lambda: {}".format(lam))
    return 5 / (6 - lam)
