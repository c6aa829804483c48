import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from gesl.analysis import operator_norm
from gesl.analysis.gap import stepsize_gate
from gesl.analysis.metrics import monte_carlo_reference
from gesl.common import make_rng
from gesl.config import grid_points
from gesl.errors import ConfigError
from gesl.envs import make, EnvSpec
from gesl.fa.model import LinearModel, compute_model
from gesl.fa.trace import estimate_model
from gesl.io import fmt_path, write_csv, read_csv, save_json
from gesl.learners import StepSizes, get_learner
from gesl.learners.control import q_learning_control, sarsa_control_fa
from gesl.learners.gradient import run_ges, run_naive
from gesl.mdp.core import TabularPolicy, exact_q
from gesl.train.metrics import MSPBE, MSE, ThetaNorm
from gesl.train.record import write_run_csv

logger = logging.getLogger(__name__)

_SETUP_STREAM = 1


@dataclass
class Problem:
    r"""
    Everything a run needs besides its step sizes: the environment with its
    target and behavior policies, the linear model used for MSPBE, and the
    reference values used for MSE.
    """
    spec: EnvSpec
    lam: float
    model: Optional[LinearModel] = None
    phi_ref: Optional[np.ndarray] = None
    q_ref: Optional[np.ndarray] = None
    weights_ref: Optional[np.ndarray] = None
    value_ref: Optional[float] = None


@dataclass
class MetricSummary:
    mean: np.ndarray
    std: np.ndarray
    n: np.ndarray


@dataclass
class AggregateResult:
    """Per (schedule, alpha, ratio) grid point: mean/std/count of every metric per episode."""
    name: str
    metrics: List[str]
    table: Dict[Tuple[str, float, float], Dict[str, MetricSummary]] = field(default_factory=dict)
    diverged: Dict[Tuple[str, float, float], int] = field(default_factory=dict)
    n_runs: int = 0
    raw: Dict[Tuple[str, float, float], List[Dict[str, np.ndarray]]] = field(default_factory=dict)
    value_ref: Optional[float] = None

    def final(self, key, metric):
        return float(self.table[key][metric].mean[-1])


@dataclass
class SweepResult:
    schedule: str
    best: Optional[Tuple[float, float, float]]
    all_diverged: bool
    scores: Dict[Tuple[float, float], float]


def build_problem(cfg) -> Problem:
    rng = make_rng(cfg.seed, 0, _SETUP_STREAM)
    if cfg.env == 'windy_gridworld':
        spec = make(cfg.env, gamma=cfg.gamma)
        mdp = spec.env
        t = cfg.tabular
        control = q_learning_control(mdp, rng, t.q_learning_episodes, t.q_learning_alpha, t.epsilon0, t.decay)
        spec.pi = control.policy
        spec.mu = TabularPolicy.epsilon_greedy(control.q, t.behavior_epsilon)
        value_ref = float(mdp.initial @ spec.pi.expected(exact_q(mdp, spec.pi)))
        logger.info("windy gridworld target value at start: %.4f", value_ref)
        return Problem(spec, cfg.lam, value_ref=value_ref)

    if cfg.env == 'mountain_car':
        m = cfg.mountain_car
        spec = make(cfg.env, gamma=cfg.gamma, n_tilings=m.n_tilings, tiles=m.tiles)
        control = sarsa_control_fa(spec.env, spec.feature_map, rng, m.sarsa_episodes, m.sarsa_alpha,
                                   m.sarsa_epsilon, m.max_steps)
        spec.pi = control.policy
        spec.mu = control.policy.with_epsilon(m.behavior_epsilon)
        n = cfg.model.mc_episodes * cfg.model.mc_horizon
        model = estimate_model(spec.env, spec.pi, spec.mu, spec.feature_map, cfg.lam, spec.gamma, rng, n,
                               cfg.model.mc_horizon)
        phi, q = monte_carlo_reference(spec.env, spec.pi, spec.mu, spec.feature_map, spec.gamma, rng,
                                       cfg.model.mc_episodes, cfg.model.mc_horizon)
        return Problem(spec, cfg.lam, model, phi, q)

    spec = make(cfg.env, gamma=cfg.gamma)
    mdp = spec.env
    weights = None if cfg.model.weights == 'stationary' else 1.0 / mdp.n_pairs
    model = compute_model(mdp, spec.pi, spec.mu, spec.feature_map, cfg.lam, weights)
    q_ref = mdp.to_pairs(exact_q(mdp, spec.pi))
    return Problem(spec, cfg.lam, model, model.phi, q_ref, model.xi)


def _metrics(cfg, problem):
    out = {}
    for name in cfg.metrics:
        if name == 'mspbe':
            out[name] = MSPBE(problem.model)
        elif name == 'mse':
            out[name] = MSE(problem.phi_ref, problem.q_ref, problem.weights_ref)
        elif name == 'theta_norm':
            out[name] = ThetaNorm()
    return out


def run_single(cfg, problem: Problem, schedule, alpha, ratio, run) -> Dict[str, np.ndarray]:
    """One run at one grid point; returns metric name to per-episode values plus a 'diverged' flag."""
    rng = make_rng(cfg.seed, run)
    spec = problem.spec
    if cfg.learner.startswith('tabular'):
        result = get_learner(cfg.learner)(spec.env, spec.pi, spec.mu, cfg.lam, alpha, cfg.n_episodes, rng,
                                          max_horizon=cfg.tabular.max_horizon)
        return {'value': result.values, 'diverged': np.array(not np.isfinite(result.values).all())}

    fn = run_ges if cfg.learner == 'ges' else run_naive
    step_sizes = StepSizes.from_ratio(alpha, ratio, schedule)
    record = fn(spec.env, spec.pi, spec.mu, spec.feature_map, cfg.lam, step_sizes, cfg.n_episodes, rng,
                episode_length=cfg.episode_length, theta0=list(cfg.theta0) or None, metrics=_metrics(cfg, problem))
    out = {name: record.metric(name) for name in cfg.metrics if name != 'value'}
    out['diverged'] = np.array(record.diverged)
    return out


def _task(args):
    cfg, problem, schedule, alpha, ratio, run = args
    return (schedule, alpha, ratio, run), run_single(cfg, problem, schedule, alpha, ratio, run)


def aggregate(name, metrics, results, n_episodes, value_ref=None) -> AggregateResult:
    r"""
    Combine raw runs into per-episode means and standard deviations.

    Runs are ordered by index before reduction, so the result does not depend
    on completion order. Values after a divergence are missing and excluded.
    """
    agg = AggregateResult(name, list(metrics), value_ref=value_ref)
    grouped = {}
    for (schedule, alpha, ratio, run), out in results:
        grouped.setdefault((schedule, alpha, ratio), []).append((run, out))
    for key, runs in grouped.items():
        runs = [out for _, out in sorted(runs, key=lambda x: x[0])]
        agg.raw[key] = runs
        agg.diverged[key] = int(sum(bool(out['diverged']) for out in runs))
        agg.table[key] = {}
        for m in metrics:
            values = np.full((len(runs), n_episodes + 1), np.nan)
            for i, out in enumerate(runs):
                v = out[m]
                values[i, :len(v)] = v
            finite = np.isfinite(values)
            n = finite.sum(0)
            with np.errstate(invalid='ignore', divide='ignore'):
                total = np.where(finite, values, 0).sum(0)
                mean = np.where(n > 0, total / np.maximum(n, 1), np.nan)
                sq = np.where(finite, (values - mean) ** 2, 0).sum(0)
                std = np.where(n > 1, np.sqrt(sq / np.maximum(n - 1, 1)), np.where(n == 1, 0.0, np.nan))
            agg.table[key][m] = MetricSummary(mean, std, n)
        agg.n_runs = max(agg.n_runs, len(runs))
    return agg


def episodes_to_target(agg: AggregateResult, metric='mspbe', ratio=0.1) -> Dict[Tuple[str, float, float], np.ndarray]:
    r"""
    Per grid point and run, the first episode whose metric is at most
    ``ratio`` times the value of the initial iterate, or ``inf`` for runs
    that never get there.
    """
    out = {}
    for key, runs in agg.raw.items():
        episodes = np.full(len(runs), np.inf)
        for i, run in enumerate(runs):
            v = np.asarray(run[metric], dtype=np.float64)
            with np.errstate(invalid='ignore'):
                hit = np.flatnonzero(v <= ratio * v[0])
            if len(hit):
                episodes[i] = hit[0]
        out[key] = episodes
    return out


def _metric_names(cfg):
    return ['value'] if cfg.learner.startswith('tabular') else [m for m in cfg.metrics if m != 'value']


def run_experiment(cfg, problem: Problem = None, write=True) -> AggregateResult:
    r"""
    Run every (schedule, grid point, run) of the experiment and aggregate.

    Runs are independent and use the Philox stream of their run index, so
    the result is the same for any number of workers.
    """
    problem = build_problem(cfg) if problem is None else problem
    tasks = [(cfg, problem, schedule, alpha, ratio, run)
             for schedule in cfg.schedules for alpha, ratio in grid_points(cfg) for run in range(cfg.n_runs)]
    logger.info("%s: %d runs on %s with %s", cfg.name, len(tasks), cfg.env, cfg.learner)
    if cfg.n_workers > 1:
        with ProcessPoolExecutor(cfg.n_workers) as ex:
            results = list(tqdm(ex.map(_task, tasks), total=len(tasks), disable=not cfg.verbose))
    else:
        results = [_task(t) for t in tqdm(tasks, disable=not cfg.verbose)]
    agg = aggregate(cfg.name, _metric_names(cfg), results, cfg.n_episodes, problem.value_ref)
    for key, n in agg.diverged.items():
        if n:
            logger.warning("%s: %d/%d runs diverged at schedule=%s alpha=%g ratio=%g", cfg.name, n, agg.n_runs, *key)
    if write:
        write_results(cfg, agg)
    return agg


def write_results(cfg, agg: AggregateResult):
    out_dir = fmt_path(cfg.out_dir) / cfg.name
    out_dir.mkdir(parents=True, exist_ok=True)
    for schedule in cfg.schedules:
        keys = sorted(k for k in agg.table if k[0] == schedule)
        for m in agg.metrics:
            rows = []
            for key in keys:
                for run, out in enumerate(agg.raw[key]):
                    for episode, v in enumerate(out[m]):
                        rows.append([key[1], key[2], run, episode, float(v)])
            write_csv(out_dir / ("%s_%s.csv" % (m, schedule)), ['grid_alpha', 'grid_ratio', 'run', 'episode', 'value'], rows)
        rows = []
        for key in keys:
            for m in agg.metrics:
                s = agg.table[key][m]
                for episode in range(len(s.mean)):
                    rows.append([key[1], key[2], m, episode, float(s.mean[episode]), float(s.std[episode]),
                                 int(s.n[episode]), agg.diverged[key]])
        write_csv(out_dir / ("aggregate_%s.csv" % schedule),
                  ['grid_alpha', 'grid_ratio', 'metric', 'episode', 'mean', 'std', 'n', 'diverged'], rows)
        if 'value' not in agg.metrics:
            for key in keys:
                for run, out in enumerate(agg.raw[key]):
                    fp = out_dir / 'runs' / ("%s_alpha%g_ratio%g_run%d.csv" % (schedule, key[1], key[2], run))
                    write_run_csv(fp, {m: out[m] for m in agg.metrics}, bool(out['diverged']))
    save_json(out_dir / 'config.json', _to_dict(cfg))
    return out_dir


def _to_dict(cfg):
    if hasattr(cfg, 'items'):
        return {k: _to_dict(v) for k, v in cfg.items()}
    if isinstance(cfg, (list, tuple)):
        return [_to_dict(v) for v in cfg]
    return cfg


def read_metric_csv(fp) -> Dict[Tuple[float, float, int], np.ndarray]:
    """Raw per-run series keyed by (grid_alpha, grid_ratio, run)."""
    header, rows = read_csv(fp)
    if header != ['grid_alpha', 'grid_ratio', 'run', 'episode', 'value']:
        raise ValueError("Unexpected metric file header: {}".format(header))
    series = {}
    for a, r, run, episode, v in rows:
        series.setdefault((float(a), float(r), int(run)), []).append((int(episode), float(v)))
    return {k: np.array([v for _, v in sorted(vs)]) for k, vs in series.items()}


def sweep_grid(cfg, agg: AggregateResult = None) -> List[SweepResult]:
    r"""
    Pick the best grid point per schedule by the final-episode mean of the
    first metric (for tabular learners: distance to the exact start value).
    Points with any diverged run are not eligible. Ties go to the smaller
    alpha, then the smaller ratio.
    """
    agg = run_experiment(cfg) if agg is None else agg
    metric = agg.metrics[0]
    results = []
    for schedule in cfg.schedules:
        scores = {}
        for key in agg.table:
            if key[0] != schedule:
                continue
            value = agg.final(key, metric)
            if metric == 'value' and agg.value_ref is not None:
                value = abs(value - agg.value_ref)
            if agg.diverged[key] or not np.isfinite(value):
                value = np.nan
            scores[key[1:]] = value
        eligible = sorted((v, a, r) for (a, r), v in scores.items() if np.isfinite(v))
        best = (eligible[0][1], eligible[0][2], eligible[0][0]) if eligible else None
        results.append(SweepResult(schedule, best, best is None, scores))
        if best is None:
            logger.warning("%s: every grid point diverged for schedule %s", cfg.name, schedule)
    return results


def verify_stepsize_gate(cfg, problem: Problem = None):
    r"""
    ``(norm, [(alpha, beta, admissible, margin), ...])`` for every grid point,
    where admissible means ``1 - sqrt(alpha beta) ||A|| > 0``.
    """
    problem = build_problem(cfg) if problem is None else problem
    if problem.model is None:
        raise ConfigError({'env': "%s has no linear model to check" % cfg.env})
    A = problem.model.A
    rows = []
    for alpha, ratio in grid_points(cfg):
        ok, margin = stepsize_gate(alpha, alpha * ratio, A)
        rows.append((alpha, alpha * ratio, ok, margin))
    return operator_norm(A), rows
