from gesl.common import make_rng, spawn_rngs
from gesl._version import __version__
