import numpy as np

from gesl.errors import ShapeError
from gesl.fa.tiles import n_tiles, tile_code
from gesl.io import read_yaml, save_yaml

__all__ = ["FeatureMap", "TabularFeatures", "TileFeatures", "load_features", "save_features"]


class FeatureMap:
    """
    Maps (state, action) to a fixed-length real vector.

    Subclasses implement ``phi``; ``expected_phi`` and ``matrix`` follow from it.
    """
    dim: int
    n_actions: int

    def phi(self, state, action):
        raise NotImplementedError

    def expected_phi(self, state, policy):
        probs = policy.probs_at(state)
        out = np.zeros(self.dim)
        for a in np.flatnonzero(probs):
            out += probs[a] * self.phi(state, a)
        return out

    def matrix(self, mdp):
        """(n_pairs, dim) feature matrix in the MDP's pair order."""
        return np.stack([self.phi(int(s), int(a)) for s, a in mdp.pairs])


class TabularFeatures(FeatureMap):

    def __init__(self, table):
        table = np.array(table, dtype=np.float64)
        if table.ndim != 3:
            raise ShapeError("Feature table must have shape (S, A, p), got %s" % (table.shape,))
        if not np.isfinite(table).all():
            raise ValueError("Features must be finite")
        table.setflags(write=False)
        self.table = table
        self.n_actions = table.shape[1]
        self.dim = table.shape[2]

    @classmethod
    def from_pairs(cls, mdp, rows):
        """Features listed in the MDP's pair order."""
        rows = np.asarray(rows, dtype=np.float64)
        if rows.shape[0] != mdp.n_pairs:
            raise ShapeError("Expected %d feature rows, got %d" % (mdp.n_pairs, rows.shape[0]))
        table = np.empty((mdp.n_states, mdp.n_actions, rows.shape[1]))
        for (s, a), row in zip(mdp.pairs, rows):
            table[s, a] = row
        return cls(table)

    @classmethod
    def one_hot(cls, n_states, n_actions):
        return cls(np.eye(n_states * n_actions).reshape(n_states, n_actions, -1))

    def phi(self, state, action):
        return self.table[state, action]

    def expected_phi(self, state, policy):
        return policy.probs_at(state) @ self.table[state]


class TileFeatures(FeatureMap):
    """Binary tile-coded features with one block of weights per action."""

    def __init__(self, config, n_actions):
        self.config = config
        self.n_actions = n_actions
        self.block = n_tiles(config)
        self.dim = self.block * n_actions

    def active(self, state, action):
        return tile_code(state, self.config) + action * self.block

    def phi(self, state, action):
        out = np.zeros(self.dim)
        out[self.active(state, action)] = 1
        return out

    def matrix(self, mdp):
        raise TypeError("Tile features have no finite state-action enumeration")


def load_features(fp) -> TabularFeatures:
    r"""
    Load tabular features from YAML::

        n_states: 2
        n_actions: 2
        dim: 2
        features: [[s, a, [phi_1, ..., phi_p]], ...]   # missing pairs are zero
    """
    d = read_yaml(fp)
    S, A, p = int(d['n_states']), int(d['n_actions']), int(d['dim'])
    table = np.zeros((S, A, p))
    for s, a, row in d['features']:
        if len(row) != p:
            raise ShapeError("Feature row of (%s, %s) has length %d, expected %d" % (s, a, len(row), p))
        table[int(s), int(a)] = row
    return TabularFeatures(table)


def save_features(fp, features: TabularFeatures):
    S, A, p = features.table.shape
    d = {
        'n_states': S,
        'n_actions': A,
        'dim': p,
        'features': [[s, a, [float(x) for x in features.table[s, a]]]
                     for s in range(S) for a in range(A) if features.table[s, a].any()],
    }
    save_yaml(fp, d)
