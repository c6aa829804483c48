import numpy as np

from gesl.mdp.core import TabularMDP

HEIGHT, WIDTH = 7, 10
WIND = (0, 0, 0, 1, 1, 1, 2, 2, 1, 0)
START, GOAL = (3, 0), (3, 7)
UP, DOWN, LEFT, RIGHT = range(4)


def cell(row, col):
    return row * WIDTH + col


def _move(row, col, action):
    w = WIND[col]
    if action == UP:
        return max(row - 1 - w, 0), col
    if action == DOWN:
        return max(min(row + 1 - w, HEIGHT - 1), 0), col
    if action == LEFT:
        return max(row - w, 0), max(col - 1, 0)
    return max(row - w, 0), min(col + 1, WIDTH - 1)


def make_windy_gridworld(gamma=0.99):
    r"""
    7x10 gridworld with upward wind per column. Every step costs -1 and the
    goal is terminal. The wind of the current column acts together with the
    chosen move and positions are clipped to the grid.
    """
    S = HEIGHT * WIDTH
    P = np.zeros((S, 4, S))
    R = -np.ones((S, 4))
    goal = cell(*GOAL)
    for row in range(HEIGHT):
        for col in range(WIDTH):
            s = cell(row, col)
            for a in range(4):
                if s == goal:
                    P[s, a, s] = 1
                else:
                    P[s, a, cell(*_move(row, col, a))] = 1
    R[goal] = 0
    terminal = np.zeros(S, dtype=bool)
    terminal[goal] = True
    initial = np.zeros(S)
    initial[cell(*START)] = 1
    return TabularMDP(P, R, gamma, terminal=terminal, initial=initial, name='windy_gridworld')
