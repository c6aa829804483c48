import numpy as np

from gesl.mdp.core import TabularMDP

LEFT, RIGHT = 0, 1


def make_corridor(length=3, gamma=1.0):
    """Deterministic corridor; ``right`` advances toward the terminal last cell, ``left`` steps back."""
    P = np.zeros((length, 2, length))
    for s in range(length - 1):
        P[s, LEFT, max(s - 1, 0)] = 1
        P[s, RIGHT, s + 1] = 1
    P[length - 1, :, length - 1] = 1
    R = -np.ones((length, 2))
    R[length - 1] = 0
    terminal = np.zeros(length, dtype=bool)
    terminal[-1] = True
    initial = np.zeros(length)
    initial[0] = 1
    return TabularMDP(P, R, gamma, terminal=terminal, initial=initial, name='corridor')
