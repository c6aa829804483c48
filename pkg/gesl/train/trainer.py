import logging
from datetime import datetime

import numpy as np
from toolz import curry

from ignite.engine import Engine, Events
from ignite.handlers import Timer

from gesl.train.record import RunRecord

logger = logging.getLogger(__name__)


def create_episode_engine(learner, env, rng, episode_length):
    r"""
    Engine whose every epoch is one behavior episode of at most
    ``episode_length`` transitions. A diverged learner terminates the run.
    """

    def _episode(engine, batch):
        stats = learner.run_episode(env, rng, episode_length)
        if stats.diverged:
            engine.state.diverged_at = learner.state.t
            engine.terminate()
        output = learner.output()
        output['steps'] = stats.steps
        return output

    return Engine(_episode)


@curry
def log_metrics(engine, name, n_episodes):
    msg = "%s %s episode %d/%d" % (
        datetime.now().strftime("[%m/%d %H:%M:%S]"), name, engine.state.epoch, n_episodes)
    for k, v in engine.state.metrics.items():
        msg += "  %s: %.6g" % (k, v)
    print(msg)


class PolicyEvaluationTrainer:
    r"""
    Drive a ``Learner`` episode by episode and record the metrics of the
    iterate reached at the end of each episode.

    Parameters
    ----------
    learner : Learner
    metrics : dict
        Name to ignite ``Metric`` evaluated on the engine output.
    verbose : bool
        Print one line per episode.
    """

    def __init__(self, learner, metrics=None, verbose=False):
        self.learner = learner
        self.metrics = metrics or {}
        self.verbose = verbose
        self._timer = Timer()

    def _initial_row(self):
        output = self.learner.output()
        row = {'episode': 0, 'wall_time': 0.0}
        for name, metric in self.metrics.items():
            metric.reset()
            metric.update(output['theta'])
            row[name] = float(metric.compute())
        return row

    def _record(self, engine, record):
        if len(record.rows) > engine.state.epoch:
            return
        row = {'episode': engine.state.epoch, 'wall_time': self._timer.value()}
        for name in self.metrics:
            row[name] = float(engine.state.metrics.get(name, np.nan))
        record.rows.append(row)

    def _record_divergence(self, engine, record):
        record.diverged = True
        record.divergence_step = getattr(engine.state, 'diverged_at', None)
        if len(record.rows) <= engine.state.epoch:
            row = {'episode': engine.state.epoch, 'wall_time': self._timer.value()}
            row.update({name: np.nan for name in self.metrics})
            record.rows.append(row)
        logger.warning("%s diverged after %s steps", self.learner.name, record.divergence_step)

    def fit(self, env, rng, n_episodes, episode_length) -> RunRecord:
        learner = self.learner
        record = RunRecord(learner.name)
        record.rows.append(self._initial_row())

        if n_episodes > 0:
            engine = create_episode_engine(learner, env, rng, episode_length)
            for name, metric in self.metrics.items():
                metric.attach(engine, name)
            self._timer.attach(engine, start=Events.STARTED)
            engine.add_event_handler(Events.EPOCH_COMPLETED, self._record, record)
            engine.add_event_handler(Events.TERMINATE, self._record_divergence, record)
            if self.verbose:
                engine.add_event_handler(Events.EPOCH_COMPLETED, log_metrics(name=learner.name, n_episodes=n_episodes))
            engine.run([None], max_epochs=n_episodes)

        out = learner.output()
        record.theta, record.omega = out['theta'], out['omega']
        record.theta_bar, record.omega_bar = learner.averages()
        record.iterates, record.omega_iterates = learner.iterates()
        return record
