import numpy as np
from toolz.curried import get

from ignite.exceptions import NotComputableError
from ignite.metrics.metric import Metric

from gesl.analysis.metrics import empirical_mspbe, empirical_mse, theta_norm


class LastIterate(Metric):
    r"""
    Evaluate a function of the iterate reached at the end of the episode.
    """

    def __init__(self, fn, key='theta'):
        self.fn = fn
        self._value = None
        super().__init__(output_transform=get(key))

    def reset(self):
        self._value = None

    def update(self, output):
        self._value = output

    def compute(self):
        if self._value is None:
            raise NotComputableError(
                'Metric must have at least one iterate before it can be computed')
        if not np.isfinite(self._value).all():
            return float('nan')
        return self.fn(self._value)


class MSPBE(LastIterate):

    def __init__(self, model):
        self.model = model
        super().__init__(lambda theta: empirical_mspbe(theta, model))


class MSE(LastIterate):
    r"""
    Root of the weighted squared error between ``Phi theta`` and reference values.
    """

    def __init__(self, phi, q_ref, weights=None):
        super().__init__(lambda theta: empirical_mse(theta, phi, q_ref, weights))


class ThetaNorm(LastIterate):

    def __init__(self):
        super().__init__(theta_norm)
