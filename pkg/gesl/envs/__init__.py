from dataclasses import dataclass
from typing import Any, Optional

from gesl.envs.two_state import make_two_state, two_state_A, divergence_region
from gesl.envs.baird import make_baird, baird_features
from gesl.envs.windy import make_windy_gridworld
from gesl.envs.corridor import make_corridor
from gesl.envs.mountain_car import MountainCar, make_mountain_car
from gesl.fa.features import TileFeatures


@dataclass
class EnvSpec:
    name: str
    env: Any
    gamma: float
    feature_map: Any = None
    pi: Any = None
    mu: Any = None

    @property
    def is_tabular(self):
        return hasattr(self.env, 'P')


def make(name, gamma=None, **kwargs) -> EnvSpec:
    """Build an environment by name; ``gamma`` overrides its default discount."""
    if name in ('two_state', 'baird'):
        fn = make_two_state if name == 'two_state' else make_baird
        mdp, features, pi, mu = fn(**({'gamma': gamma} if gamma is not None else {}), **kwargs)
        return EnvSpec(name, mdp, mdp.gamma, features, pi, mu)
    if name == 'windy_gridworld':
        mdp = make_windy_gridworld(**({'gamma': gamma} if gamma is not None else {}))
        return EnvSpec(name, mdp, mdp.gamma)
    if name == 'corridor':
        mdp = make_corridor(**({'gamma': gamma} if gamma is not None else {}), **kwargs)
        return EnvSpec(name, mdp, mdp.gamma)
    if name == 'mountain_car':
        env, tiles = make_mountain_car(**({'gamma': gamma} if gamma is not None else {}), **kwargs)
        features = TileFeatures(tiles, env.n_actions)
        return EnvSpec(name, env, env.gamma, features)
    raise ValueError("Unknown environment: {}".format(name))
