import math

from torch.optim.lr_scheduler import _LRScheduler

SCHEDULES = {
    'constant': lambda t: 1.0,
    'inv_sqrt': lambda t: 1.0 / math.sqrt(t + 1),
    'inv': lambda t: 1.0 / (t + 1),
}


def schedule_factor(schedule, t):
    try:
        return SCHEDULES[schedule](t)
    except KeyError:
        raise ValueError("Unknown step-size schedule: {}".format(schedule))


class StepSizeLR(_LRScheduler):
    r"""Scale the base step size of every parameter group by ``f(t)`` after ``t`` steps.

    Args:
        optimizer (Optimizer): Wrapped optimizer.
        schedule (str): 'constant', 'inv_sqrt' (``1 / sqrt(t + 1)``) or 'inv' (``1 / (t + 1)``).
        last_epoch (int, optional): The index of the last step. Default: -1.
    """

    def __init__(self, optimizer, schedule='constant', last_epoch=-1):
        if schedule not in SCHEDULES:
            raise ValueError("Unknown step-size schedule: {}".format(schedule))
        self.schedule = schedule
        self._f = SCHEDULES[schedule]
        super().__init__(optimizer, last_epoch)

    def get_lr(self):
        f = self._f(max(self.last_epoch, 0))
        return [base_lr * f for base_lr in self.base_lrs]
