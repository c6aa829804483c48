import numpy as np

from gesl.fa.tiles import TileCodingConfig

POSITION = (-1.2, 0.5)
VELOCITY = (-0.07, 0.07)
REVERSE, COAST, THROTTLE = range(3)


class MountainCar:
    r"""
    Under-powered car in a valley. The state is (position, velocity); every
    step costs -1 until the car reaches ``position >= 0.5``.
    """
    n_actions = 3

    def __init__(self, gamma=0.99):
        self.gamma = gamma

    def reset(self, rng):
        return np.array([rng.uniform(-0.6, -0.4), 0.0])

    def step(self, state, action, rng=None):
        x, v = state
        v = np.clip(v + 0.001 * (action - 1) - 0.0025 * np.cos(3 * x), *VELOCITY)
        x = np.clip(x + v, *POSITION)
        if x == POSITION[0] and v < 0:
            v = 0.0
        done = bool(x >= POSITION[1])
        return -1.0, np.array([x, v]), done

    def tile_config(self, n_tilings=4, tiles=8, hash_size=None):
        return TileCodingConfig(n_tilings, (tiles, tiles), (POSITION, VELOCITY), hash_size)

    def __repr__(self):
        return "MountainCar(gamma=%s)" % self.gamma


def make_mountain_car(gamma=0.99, n_tilings=4, tiles=8, hash_size=None):
    """``(env, tile_config)`` with 4 tilings of 8x8 tiles by default."""
    env = MountainCar(gamma)
    return env, env.tile_config(n_tilings, tiles, hash_size)
