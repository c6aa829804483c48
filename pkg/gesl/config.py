from typing import Dict, Optional, Sequence

import numpy as np
from yacs.config import CfgNode as CN

from gesl.errors import ConfigError

ENVS = ('two_state', 'baird', 'windy_gridworld', 'mountain_car')
LEARNERS = ('ges', 'naive', 'tabular_escv', 'tabular_es')
SCHEDULES = ('constant', 'inv_sqrt', 'inv')
METRICS = ('mspbe', 'mse', 'theta_norm', 'value')

DEFAULTS = {
    'name': 'experiment',
    'env': 'two_state',
    'learner': 'ges',
    'lam': 0.99,
    # None keeps the discount of the environment
    'gamma': None,
    'schedules': ['constant'],
    'grid': {
        'base': 0.1,
        'alpha_exponents': list(range(-10, 1)),
        'ratio_exponents': list(range(-10, 1)),
        # explicit values override the exponent grid when non-empty
        'alphas': [],
        'ratios': [],
    },
    # initial parameter vector of the gradient learners, zeros when empty
    'theta0': [],
    # a run reaches its target once a metric falls to this fraction of its initial value
    'target_ratio': 0.1,
    'n_runs': 20,
    'n_episodes': 500,
    'episode_length': 100,
    'seed': 0,
    'n_workers': 1,
    'metrics': ['mspbe', 'mse', 'theta_norm'],
    'out_dir': 'results',
    'verbose': False,
    'model': {
        'weights': 'stationary',
        'mc_episodes': 200,
        'mc_horizon': 200,
    },
    'tabular': {
        'q_learning_episodes': 150,
        'q_learning_alpha': 0.5,
        'epsilon0': 0.2,
        'decay': 0.95,
        'behavior_epsilon': 0.2,
        'max_horizon': 1000,
    },
    'mountain_car': {
        'sarsa_episodes': 500,
        'sarsa_alpha': 0.5,
        'sarsa_epsilon': 0.1,
        'behavior_epsilon': 0.1,
        'n_tilings': 4,
        'tiles': 8,
        'max_steps': 2000,
    },
    'divergence': {
        'lam': 0.9,
        'gamma': 0.99,
        'alpha': 0.05,
        'theta0': [1.0, 1.0],
        'threshold': 1e6,
        'steps': 5000,
        'n_seeds': 5,
    },
}


def load_from_dict(d: Dict):
    cfg = CN()
    for k, v in d.items():
        if isinstance(v, dict):
            v = load_from_dict(v)
        setattr(cfg, k, v)
    return cfg


cfg = load_from_dict(DEFAULTS)


def get_cfg_defaults():
    return cfg.clone()


def grid_points(cfg):
    g = cfg.grid
    alphas = list(g.alphas) or [g.base * 2.0 ** j for j in g.alpha_exponents]
    ratios = list(g.ratios) or [g.base * 2.0 ** j for j in g.ratio_exponents]
    if cfg.learner.startswith('tabular'):
        ratios = [0.0]
    return [(float(a), float(r)) for a in alphas for r in ratios]


def validate(cfg):
    errors = {}
    if cfg.env not in ENVS:
        errors['env'] = "unknown environment %r" % cfg.env
    if cfg.learner not in LEARNERS:
        errors['learner'] = "unknown learner %r" % cfg.learner
    if not 0 <= cfg.lam <= 1:
        errors['lam'] = "must lie in [0, 1], got %s" % cfg.lam
    if cfg.gamma is not None and not 0 < cfg.gamma <= 1:
        errors['gamma'] = "must lie in (0, 1], got %s" % cfg.gamma
    bad = [s for s in cfg.schedules if s not in SCHEDULES]
    if bad or not cfg.schedules:
        errors['schedules'] = "expected a non-empty subset of %s, got %s" % (SCHEDULES, list(cfg.schedules))
    bad = [m for m in cfg.metrics if m not in METRICS]
    if bad:
        errors['metrics'] = "unknown metrics %s" % bad
    for key in ('alpha_exponents', 'ratio_exponents'):
        exps = cfg.grid[key]
        if any(not -10 <= e <= 0 for e in exps):
            errors['grid.' + key] = "exponents must lie in [-10, 0]"
    for key in ('alphas', 'ratios'):
        if any(v <= 0 for v in cfg.grid[key]):
            errors['grid.' + key] = "step sizes must be positive"
    for key in ('n_runs', 'n_episodes', 'episode_length', 'n_workers'):
        if cfg[key] < 0 or (key != 'n_episodes' and cfg[key] == 0):
            errors[key] = "invalid value %s" % cfg[key]
    if cfg.env == 'windy_gridworld' and not cfg.learner.startswith('tabular'):
        errors['learner'] = "windy_gridworld is evaluated with tabular learners"
    if cfg.learner.startswith('tabular') and cfg.env != 'windy_gridworld':
        errors['env'] = "tabular learners run on windy_gridworld"
    if not all(np.isfinite(v) for v in cfg.theta0):
        errors['theta0'] = "entries must be finite"
    if not 0 < cfg.target_ratio < 1:
        errors['target_ratio'] = "must lie in (0, 1), got %s" % cfg.target_ratio
    if cfg.model.weights not in ('stationary', 'uniform'):
        errors['model.weights'] = "expected 'stationary' or 'uniform'"
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(fp=None, overrides: Optional[Sequence[str]] = None):
    cfg = get_cfg_defaults()
    try:
        if fp is not None:
            cfg.merge_from_file(str(fp))
        if overrides:
            cfg.merge_from_list(list(overrides))
    except (KeyError, ValueError, AssertionError) as e:
        raise ConfigError({'file': str(e)})
    validate(cfg)
    cfg.freeze()
    return cfg
