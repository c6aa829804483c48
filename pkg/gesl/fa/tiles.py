from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from gesl.errors import ShapeError

__all__ = ["TileCodingConfig", "tile_code", "n_tiles"]

_HASH = 2654435761


@dataclass(frozen=True)
class TileCodingConfig:
    r"""
    Uniformly offset grid tilings over a box.

    Tiling ``i`` is shifted by ``i / n_tilings`` of a tile width along every
    dimension, so each tiling holds ``tiles + 1`` cells per dimension.
    """
    n_tilings: int
    tiles_per_dim: Tuple[int, ...]
    bounds: Tuple[Tuple[float, float], ...]
    hash_size: Optional[int] = None

    def __post_init__(self):
        if self.n_tilings < 1:
            raise ValueError("Invalid number of tilings: {}".format(self.n_tilings))
        if len(self.tiles_per_dim) != len(self.bounds):
            raise ShapeError("tiles_per_dim and bounds differ in length")
        if any(hi <= lo for lo, hi in self.bounds):
            raise ValueError("Invalid bounds: {}".format(self.bounds))
        if self.hash_size is not None and self.hash_size < self.n_tilings:
            raise ValueError("Invalid hash size: {}".format(self.hash_size))


def _cells(config):
    return np.asarray(config.tiles_per_dim, dtype=np.int64) + 1


def n_tiles(config: TileCodingConfig):
    if config.hash_size is not None:
        return config.hash_size
    return int(config.n_tilings * np.prod(_cells(config)))


def tile_code(x, config: TileCodingConfig):
    """Indices of the ``n_tilings`` active tiles for point ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (len(config.bounds),):
        raise ShapeError("Expected a point of dimension %d, got %s" % (len(config.bounds), x.shape))
    lo = np.array([b[0] for b in config.bounds])
    hi = np.array([b[1] for b in config.bounds])
    tiles = np.asarray(config.tiles_per_dim, dtype=np.float64)
    scaled = (np.clip(x, lo, hi) - lo) / (hi - lo) * tiles
    cells = _cells(config)
    strides = np.concatenate([np.cumprod(cells[::-1])[::-1][1:], [1]])
    offsets = np.arange(config.n_tilings)[:, None] / config.n_tilings
    coords = np.minimum(np.floor(scaled[None] + offsets).astype(np.int64), cells - 1)
    local = coords @ strides
    if config.hash_size is None:
        block = int(np.prod(cells))
    else:
        # each tiling hashes into its own block, so tilings never share an index
        block = config.hash_size // config.n_tilings
        local = (local * _HASH) % block
    return local + np.arange(config.n_tilings) * block
