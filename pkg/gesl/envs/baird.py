import numpy as np

from gesl.fa.features import TabularFeatures
from gesl.mdp.core import TabularMDP, TabularPolicy

DASHED, SOLID = 0, 1
N_STATES = 7
DIM = 16


def baird_features():
    table = np.zeros((N_STATES, 2, DIM))
    for i in range(N_STATES):
        table[i, DASHED, i] = 2
        table[i, DASHED, 7] = 1
        table[i, SOLID, 8 + i] = 2
        table[i, SOLID, 15] = 1
    return TabularFeatures(table)


def make_baird(gamma=0.99):
    r"""
    Seven-state star. ``dashed`` jumps uniformly to one of the first six
    states, ``solid`` to the seventh. Behavior takes dashed with probability
    6/7, the target always takes solid. All rewards are zero.

    Returns
    -------
    (mdp, features, pi, mu)
    """
    P = np.zeros((N_STATES, 2, N_STATES))
    P[:, DASHED, :6] = 1 / 6
    P[:, SOLID, 6] = 1
    mdp = TabularMDP(P, np.zeros((N_STATES, 2)), gamma, name='baird')
    pi = TabularPolicy([[0.0, 1.0]] * N_STATES)
    mu = TabularPolicy([[6 / 7, 1 / 7]] * N_STATES)
    return mdp, baird_features(), pi, mu
