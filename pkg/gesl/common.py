from collections.abc import Sequence, Mapping

import numpy as np
import torch

DTYPE = torch.float64


def to_tensor(t):
    if torch.is_tensor(t):
        return t.to(DTYPE)
    elif isinstance(t, np.ndarray):
        return torch.as_tensor(t, dtype=DTYPE)
    elif isinstance(t, Mapping):
        return t.__class__((k, to_tensor(v)) for k, v in t.items())
    elif isinstance(t, Sequence) and not isinstance(t, str):
        return torch.as_tensor(np.asarray(t, dtype=np.float64), dtype=DTYPE)
    else:
        return t


def to_numpy(t):
    if torch.is_tensor(t):
        return t.detach().cpu().numpy().astype(np.float64)
    elif isinstance(t, Mapping):
        return t.__class__((k, to_numpy(v)) for k, v in t.items())
    elif isinstance(t, (list, tuple)):
        return t.__class__(to_numpy(x) for x in t)
    else:
        return t


def make_rng(seed, run=0, stream=0):
    """Independent Philox stream for ``run`` under the master ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=(stream, run))
    return np.random.Generator(np.random.Philox(ss))


def spawn_rngs(seed, n):
    return [make_rng(seed, i) for i in range(n)]
