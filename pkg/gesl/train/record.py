from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from gesl.io import write_csv, read_csv

RUN_COLUMNS = ('episode', 'mspbe', 'mse', 'theta_norm', 'diverged')


def write_run_csv(fp, series: Dict[str, np.ndarray], diverged=False):
    r"""
    One row per episode with the columns of ``RUN_COLUMNS``. Metrics missing
    from ``series`` are NaN; ``diverged`` is 1 on the row where a diverged run
    stopped.
    """
    n = max((len(v) for v in series.values()), default=0)
    rows = []
    for episode in range(n):
        row = [episode]
        for name in RUN_COLUMNS[1:-1]:
            v = series.get(name)
            row.append(float(v[episode]) if v is not None and episode < len(v) else float('nan'))
        row.append(int(bool(diverged) and episode == n - 1))
        rows.append(row)
    return write_csv(fp, RUN_COLUMNS, rows)


@dataclass
class RunRecord:
    r"""
    Per-episode metrics of one run. Row 0 holds the metrics of the initial
    iterate; ``theta_bar`` averages the iterates after each update.
    """
    learner: str
    rows: List[Dict] = field(default_factory=list)
    theta: Optional[np.ndarray] = None
    omega: Optional[np.ndarray] = None
    theta_bar: Optional[np.ndarray] = None
    omega_bar: Optional[np.ndarray] = None
    diverged: bool = False
    divergence_step: Optional[int] = None
    iterates: Optional[np.ndarray] = None
    omega_iterates: Optional[np.ndarray] = None

    def metric(self, name):
        return np.array([row.get(name, np.nan) for row in self.rows], dtype=np.float64)

    @property
    def n_episodes(self):
        return len(self.rows) - 1

    def to_csv(self, fp):
        return write_run_csv(fp, {name: self.metric(name) for name in RUN_COLUMNS[1:-1]}, self.diverged)

    @classmethod
    def from_csv(cls, fp, learner='unknown'):
        header, rows = read_csv(fp)
        if tuple(header) != RUN_COLUMNS:
            raise ValueError("Unexpected run file header: {}".format(header))
        record = cls(learner)
        for row in rows:
            record.rows.append({'episode': int(row[0]), **{k: float(v) for k, v in zip(RUN_COLUMNS[1:-1], row[1:-1])}})
            record.diverged = record.diverged or row[-1] == '1'
        return record
