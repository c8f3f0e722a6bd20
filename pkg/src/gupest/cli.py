"""Command-line front end: single reports, parameter sweeps and Monte Carlo runs.

Every sweep writes one row per point with the swept variable(s) first and
then ``H,F,I_mu,F_amended,F_classical_full,R,Q``. Options can also come
from an INI file (section ``[gupest]``, keys named like the long flags
with dashes or underscores); explicit flags override the file.

Exit status: 0 on success, 2 for configuration errors, 3 when a numerical
procedure could not reach its tolerance.
"""

import argparse
import configparser
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, estimation, model, montecarlo
from .errors import AccuracyError, BracketError, DomainError
from .hilbert import DerivativeSpec, QuadratureSpec
from .states import parse_angle, parse_state

METRICS = ("H", "F", "I_mu", "F_amended", "F_classical_full", "R", "Q")
COMMANDS = ("report", "sweep-beta", "sweep-angle", "sweep-qutrit",
            "sweep-temperature", "sweep-omegam", "mc")

# hard defaults, applied after the config file
DEFAULTS = {
    "state": "n:0",
    "beta": "0.01",
    "m": 1.0,
    "omega": 1.0,
    "family": "qubit",
    "angle": "0:pi/2:21",
    "phi": "0:pi/2:21",
    "theta": "0:pi/2:11",
    "T": "0.05:1.0:20",
    "omegam": "0.1:1e6:29",
    "replicas": 100,
    "count": 10000,
    "seed": 12345,
    "bracket": None,
    "rel_tol": 1e-10,
    "abs_tol": 1e-12,
    "rel_step": 1e-4,
    "output": None,
}


class ConfigError(Exception):
    pass


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gupest",
        description="Fisher information and quantum Fisher information for estimating the "
                    "minimal-length parameter beta with a deformed harmonic oscillator.",
    )
    parser.add_argument("--version", action="version", version=f"gupest {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="INI file with a [gupest] section")
    parser.add_argument("--state", help="state descriptor, e.g. n:0, qubit:phi=0.3, thermal:T=0.5")
    parser.add_argument("--beta", help="beta value, or lo:hi:n for sweep-beta")
    spacing = parser.add_mutually_exclusive_group()
    spacing.add_argument("--log", dest="log", action="store_true", default=None,
                         help="logarithmic spacing of ranges")
    spacing.add_argument("--linear", dest="log", action="store_false",
                         help="linear spacing of ranges")
    parser.add_argument("--m", type=float, help="mass")
    parser.add_argument("--omega", type=float, help="angular frequency")
    parser.add_argument("--family", choices=("qubit", "mix"),
                        help="sweep-angle family: qubit superposition or ground/first mixture")
    parser.add_argument("--angle", help="sweep-angle range lo:hi:n (accepts pi, e.g. 0:pi/2:21)")
    parser.add_argument("--phi", help="sweep-qutrit phi range")
    parser.add_argument("--theta", help="sweep-qutrit theta range")
    parser.add_argument("--T", dest="T", help="temperature range for sweep-temperature")
    parser.add_argument("--omegam", help="range of m*omega/beta for sweep-omegam")
    parser.add_argument("--replicas", type=int, help="mc: number of replicas")
    parser.add_argument("--count", type=int, help="mc: samples per replica")
    parser.add_argument("--seed", type=int, help="mc: base seed")
    parser.add_argument("--bracket", help="mc: MLE search bracket lo:hi")
    parser.add_argument("--rel-tol", type=float, help="quadrature relative tolerance")
    parser.add_argument("--abs-tol", type=float, help="quadrature absolute tolerance")
    parser.add_argument("--rel-step", type=float, help="relative finite-difference step in beta")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")
    parser.add_argument("--output", "-o", help="output file (default: stdout)")
    return parser


def resolve(args):
    """Merge flags, config file and defaults into a plain dict."""
    cfg = dict(DEFAULTS)
    cfg["log"] = args.command in ("sweep-beta", "sweep-omegam")
    cfg["format"] = "csv" if args.command.startswith("sweep") else "json"
    if args.config:
        ini = configparser.ConfigParser()
        ini.optionxform = str
        if not ini.read(args.config):
            raise ConfigError(f"cannot read config file {args.config!r}")
        if "gupest" not in ini:
            raise ConfigError(f"config file {args.config!r} has no [gupest] section")
        for key, val in ini["gupest"].items():
            key = key.replace("-", "_")
            if key == "command":
                continue
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = val
    for key, val in vars(args).items():
        if key not in ("command", "config") and val is not None:
            cfg[key] = val
    try:
        for key in ("m", "omega", "rel_tol", "abs_tol", "rel_step"):
            cfg[key] = float(cfg[key])
        for key in ("replicas", "count", "seed"):
            cfg[key] = int(cfg[key])
        if isinstance(cfg["log"], str):
            cfg["log"] = configparser.ConfigParser.BOOLEAN_STATES[cfg["log"].lower()]
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    cfg["command"] = args.command
    return cfg


def parse_range(text, log=False, name="range"):
    """``lo:hi:n`` -> n points (n >= 2); a single value -> one point."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return np.array([parse_angle(parts[0])])
        if len(parts) != 3:
            raise ValueError
        lo, hi, n = parse_angle(parts[0]), parse_angle(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"{name}: expected a value or lo:hi:n, got {text!r}") from None
    if n < 2:
        raise ConfigError(f"{name}: a sweep needs at least 2 points")
    if not hi > lo:
        raise ConfigError(f"{name}: empty range {text!r}")
    if log:
        if lo <= 0:
            raise ConfigError(f"{name}: logarithmic range needs lo > 0")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _check_beta(beta):
    lo, hi = model.BETA_WINDOW
    if not lo <= beta <= hi:
        raise ConfigError(f"beta={beta:g} outside the supported window [{lo:g}, {hi:g}]")


def _evaluate(task):
    state_text, beta, m, omega, qspec, dspec = task
    d = model.Deformation(beta)
    cfg = model.OscillatorConfig(m, omega)
    state = parse_state(state_text, d, cfg)
    rep = estimation.fi_momentum(state, d, cfg, qspec, dspec)
    return [getattr(rep, k) for k in METRICS]


def _workers():
    env = os.environ.get("GUPEST_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"GUPEST_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("GUPEST_THREADS must be at least 1")
        return n
    return os.cpu_count() or 1


def _run_map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        # map keeps input order whatever the completion order
        return list(pool.map(fn, tasks))


def plan(cfg):
    """Turn a resolved config into ``(columns, keys, tasks)``."""
    qspec = QuadratureSpec(cfg["rel_tol"], cfg["abs_tol"])
    dspec = DerivativeSpec(cfg["rel_step"])
    m, omega, command = cfg["m"], cfg["omega"], cfg["command"]
    model.OscillatorConfig(m, omega)
    tasks, keys = [], []

    def single_beta():
        betas = parse_range(cfg["beta"], name="beta")
        if len(betas) != 1:
            raise ConfigError(f"{command} takes a single --beta value")
        _check_beta(betas[0])
        return float(betas[0])

    if command in ("report", "sweep-beta"):
        if command == "report":
            betas = [single_beta()]
        else:
            betas = parse_range(cfg["beta"], cfg["log"], "beta")
            if len(betas) < 2:
                raise ConfigError("sweep-beta needs a range lo:hi:n")
        for b in betas:
            _check_beta(b)
            keys.append((float(b),))
            tasks.append((cfg["state"], float(b), m, omega, qspec, dspec))
        return ("beta",), keys, tasks
    if command == "sweep-angle":
        beta = single_beta()
        angles = parse_range(cfg["angle"], cfg["log"], "angle")
        name = "phi" if cfg["family"] == "qubit" else "theta"
        for a in angles:
            keys.append((float(a),))
            tasks.append((f"{cfg['family']}:{name}={float(a)!r}", beta, m, omega, qspec, dspec))
        return (name,), keys, tasks
    if command == "sweep-qutrit":
        beta = single_beta()
        thetas = parse_range(cfg["theta"], cfg["log"], "theta")
        phis = parse_range(cfg["phi"], cfg["log"], "phi")
        for th in thetas:
            for ph in phis:
                keys.append((float(th), float(ph)))
                desc = f"qutrit:phi={float(ph)!r},theta={float(th)!r}"
                tasks.append((desc, beta, m, omega, qspec, dspec))
        return ("theta", "phi"), keys, tasks
    if command == "sweep-temperature":
        beta = single_beta()
        temps = parse_range(cfg["T"], cfg["log"], "T")
        if temps[0] <= 0:
            raise ConfigError("temperatures must be positive")
        for t in temps:
            keys.append((float(t),))
            tasks.append((f"thermal:T={float(t)!r}", beta, m, omega, qspec, dspec))
        return ("T",), keys, tasks
    if command == "sweep-omegam":
        beta = single_beta()
        ratios = parse_range(cfg["omegam"], cfg["log"], "omegam")
        if ratios[0] <= 0:
            raise ConfigError("omegam values must be positive")
        for r in ratios:
            # the axis is m*omega/beta; omega stays fixed and m absorbs the change
            keys.append((float(r),))
            tasks.append((cfg["state"], beta, float(r) * beta / omega, omega, qspec, dspec))
        return ("omegam_over_beta",), keys, tasks
    raise ConfigError(f"command {command!r} has no sweep plan")


def _fmt(x):
    return repr(float(x))


def write_table(columns, rows, cfg, out):
    header = list(columns) + list(METRICS)
    if cfg["format"] == "csv":
        w = csv.writer(out, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    else:
        json.dump({"meta": _meta(cfg), "rows": [dict(zip(header, map(float, r))) for r in rows]},
                  out, indent=2, allow_nan=True)
        out.write("\n")


def _meta(cfg):
    echo = {k: cfg[k] for k in sorted(cfg) if k != "output"}
    return {"version": __version__, "config": echo}


def run_mc(cfg, out, workers):
    beta = parse_range(cfg["beta"], name="beta")
    if len(beta) != 1:
        raise ConfigError("mc takes a single --beta value (the true beta)")
    beta = float(beta[0])
    _check_beta(beta)
    ocfg = model.OscillatorConfig(cfg["m"], cfg["omega"])
    d = model.Deformation(beta)
    state = parse_state(cfg["state"], d, ocfg)
    bracket = model.BETA_WINDOW
    if cfg["bracket"]:
        try:
            bracket = tuple(float(x) for x in cfg["bracket"].split(":"))
        except ValueError:
            bracket = ()
        if len(bracket) != 2:
            raise ConfigError(f"bracket: expected lo:hi, got {cfg['bracket']!r}")
        _check_beta(bracket[0])
        _check_beta(bracket[1])
        if not bracket[0] < beta < bracket[1]:
            raise ConfigError("bracket must contain the true beta")
    if cfg["replicas"] < 10 or cfg["count"] < 1:
        raise ConfigError("mc needs replicas >= 10 and count >= 1")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            res = montecarlo.cr_experiment(
                state, beta, ocfg, cfg["replicas"], cfg["count"], cfg["seed"], bracket,
                map_fn=lambda f, jobs: pool.map(f, jobs, chunksize=4))
    else:
        res = montecarlo.cr_experiment(
            state, beta, ocfg, cfg["replicas"], cfg["count"], cfg["seed"], bracket)
    summary = res.as_dict()
    if cfg["format"] == "json":
        json.dump({"meta": _meta(cfg), "summary": summary}, out, indent=2, allow_nan=True)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(["key", "value"])
    for key, val in _flatten(summary):
        w.writerow([key, val])


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], _fmt(obj) if isinstance(obj, float) else obj


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        workers = _workers()
        buf = io.StringIO()
        if cfg["command"] == "mc":
            run_mc(cfg, buf, workers)
        else:
            columns, keys, tasks = plan(cfg)
            values = _run_map(_evaluate, tasks, workers)
            write_table(columns, [k + tuple(v) for k, v in zip(keys, values)], cfg, buf)
    except (ConfigError, DomainError, BracketError) as exc:
        print(f"gupest: error: {exc}", file=sys.stderr)
        return 2
    except AccuracyError as exc:
        print(f"gupest: accuracy failure: {exc}", file=sys.stderr)
        return 3
    if cfg["output"]:
        with open(cfg["output"], "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
