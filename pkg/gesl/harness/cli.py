import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from gesl.config import load_config
from gesl.errors import ConfigError
from gesl.harness.divergence import demo_divergence
from gesl.harness.experiment import run_experiment, sweep_grid, verify_stepsize_gate, write_results, episodes_to_target

PRESETS = Path(__file__).parent / "presets"


def preset_names():
    return sorted(p.stem for p in PRESETS.glob("*.yaml"))


def resolve_config(name):
    """A path to a YAML file, or the name of a shipped preset."""
    if name is None:
        return None
    fp = Path(name).expanduser()
    if fp.is_file():
        return fp
    preset = PRESETS / ("%s.yaml" % name)
    if preset.is_file():
        return preset
    raise ConfigError({'config': "no such file or preset %r (presets: %s)" % (name, ", ".join(preset_names()))})


def _overrides(args):
    opts = []
    for flag, key in [('seed', 'seed'), ('runs', 'n_runs'), ('episodes', 'n_episodes'),
                      ('out_dir', 'out_dir'), ('workers', 'n_workers')]:
        v = getattr(args, flag)
        if v is not None:
            opts += [key, repr(v) if key == 'out_dir' else str(v)]
    if args.verbose:
        opts += ['verbose', 'True']
    return opts + list(args.opts)


def get_parser():
    parser = argparse.ArgumentParser(
        prog="gesl", description="Off-policy evaluation with Expected Sarsa(lambda) and its gradient variant.")
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    def add(name, help, config_required=True):
        p = sub.add_parser(name, help=help)
        if config_required:
            p.add_argument("config", help="YAML experiment file or preset name")
        else:
            p.add_argument("--config", default=None, help="YAML experiment file or preset name")
        p.add_argument("--seed", type=int, default=None, help="Master seed.")
        p.add_argument("--runs", type=int, default=None, help="Runs per grid point.")
        p.add_argument("--episodes", type=int, default=None, help="Episodes per run.")
        p.add_argument("--out-dir", dest="out_dir", default=None, help="Directory of the CSV output.")
        p.add_argument("--workers", type=int, default=None, help="Worker processes.")
        p.add_argument("-v", "--verbose", action="store_true")
        p.add_argument("opts", nargs="*", default=[], help="KEY VALUE config overrides")
        return p

    add("run", "Run every grid point and write metric CSVs.")
    add("sweep", "Run the grid and report the best step sizes per schedule.")
    add("verify", "Check the constant step-size condition on every grid point.")
    add("demo-divergence", "Two-state divergence of the semi-gradient learner.", config_required=False)
    return parser


def _run(cfg):
    agg = run_experiment(cfg, write=False)
    out_dir = write_results(cfg, agg)
    for key in sorted(agg.table):
        finals = "  ".join("%s: %.6g" % (m, agg.final(key, m)) for m in agg.metrics)
        print("%s alpha=%g ratio=%g  %s  diverged: %d/%d" % (key + (finals, agg.diverged[key], agg.n_runs)))
    if 'mspbe' in agg.metrics:
        for key, episodes in sorted(episodes_to_target(agg, 'mspbe', cfg.target_ratio).items()):
            print("%s alpha=%g ratio=%g  median episodes to %g x initial mspbe: %g" % (
                key + (cfg.target_ratio, np.median(episodes))))
    print("results written to %s" % out_dir)


def _sweep(cfg):
    agg = run_experiment(cfg)
    for result in sweep_grid(cfg, agg):
        if result.all_diverged:
            print("%s: all grid points diverged" % result.schedule)
        else:
            alpha, ratio, score = result.best
            print("%s: best alpha=%g ratio=%g (final %s %.6g)" % (result.schedule, alpha, ratio, agg.metrics[0], score))


def _verify(cfg):
    norm, rows = verify_stepsize_gate(cfg)
    print("operator norm of A: %.6g" % norm)
    for alpha, beta, ok, margin in rows:
        print("alpha=%g beta=%g  %s (margin %.4g)" % (alpha, beta, "pass" if ok else "FAIL", margin))


def _demo(cfg):
    for line in demo_divergence(cfg).lines():
        print(line)


COMMANDS = {
    'run': _run,
    'sweep': _sweep,
    'verify': _verify,
    'demo-divergence': _demo,
}


def main(argv=None):
    # KEY VALUE pairs given after the flags are overrides too
    args, extra = get_parser().parse_known_args(argv)
    args.opts = list(args.opts) + extra
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="[%(asctime)s] %(levelname)s %(name)s: %(message)s", datefmt="%m/%d %H:%M:%S")
    try:
        cfg = load_config(resolve_config(args.config), _overrides(args))
        COMMANDS[args.command](cfg)
    except ConfigError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    return 0


if __name__ == '__main__':
    sys.exit(main())
