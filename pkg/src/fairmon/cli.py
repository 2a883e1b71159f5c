"""Command-line surface: monitor, simulate, truth, compare-bounds, experiment.

Event streams are one observation symbol per line, UTF-8, blank lines
ignored.  Exit codes: 0 success, 2 configuration error, 3 malformed event.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .bounds import (ci_mc_pointwise, ci_mc_uniform, ci_pomc_pointwise,
                     ci_pomc_uniform, naive_uniform_lift)
from .errors import ConfigError, FairmonError
from .markov import ObservationModel, mixing_time_bound, simulate, truth_value
from .mc import build_mc_monitor
from .pomc import build_pomc_monitor
from .speclang.parser import parse_spec_file

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EVENT = 3


def _load_model(path: str) -> ObservationModel:
    return ObservationModel.from_json(Path(path).read_text())


def _load_spec(path: str, allow_transvars: bool):
    return parse_spec_file(Path(path).read_text(), allow_transvars=allow_transvars)


def _jsonable(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return x


def _emit(out, fmt: str, t: int, verdict) -> None:
    iv = verdict.interval
    lo = _jsonable(iv.lo) if iv is not None else None
    hi = _jsonable(iv.hi) if iv is not None else None
    point = _jsonable(verdict.point)
    if fmt == "jsonl":
        out.write(json.dumps({"t": t, "lo": lo, "hi": hi, "point": point,
                              "verdict": verdict.kind}) + "\n")
    else:
        cells = ["" if v is None else repr(v) for v in (lo, hi, point)]
        out.write(f"{t},{cells[0]},{cells[1]},{cells[2]},{verdict.kind}\n")


def cmd_monitor(args) -> int:
    spec = _load_spec(args.spec, allow_transvars=(args.engine == "mc"))
    if not 0.0 < args.delta < 1.0:
        raise ConfigError(f"--delta must be in (0,1), got {args.delta}")
    if args.stride < 1:
        raise ConfigError("--stride must be positive")

    if args.engine == "pomc":
        tau = args.tau_mix
        if tau is None:
            if args.model is None:
                raise ConfigError("engine 'pomc' needs --tau-mix (or --model to compute it)")
            tau = mixing_time_bound(_load_model(args.model)).tau_mix
        monitor = build_pomc_monitor(spec.expression, args.delta, args.mode, tau,
                                     alphabet=spec.alphabet,
                                     intersect_verdicts=args.intersect)
    else:
        monitor = build_mc_monitor(spec.expression, args.delta, args.mode,
                                   seed=args.seed, alphabet=spec.alphabet)

    source = sys.stdin if args.events is None else open(args.events)
    out = sys.stdout
    alphabet = set(spec.alphabet)
    t = 0
    try:
        if args.format == "csv":
            out.write("t,lo,hi,point,verdict\n")
        for line_no, line in enumerate(source, start=1):
            symbol = line.strip()
            if not symbol:
                continue
            if symbol not in alphabet:
                sys.stderr.write(
                    f"error: line {line_no}: symbol {symbol!r} is not in the alphabet\n")
                return EXIT_EVENT
            t += 1
            verdict = monitor.next(symbol)
            if t % args.stride == 0:
                _emit(out, args.format, t, verdict)
    finally:
        if source is not sys.stdin:
            source.close()
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = _load_model(args.model)
    out = sys.stdout
    for symbol in simulate(model, args.steps, args.seed, start=args.start):
        out.write(symbol + "\n")
    return EXIT_OK


def cmd_truth(args) -> int:
    model = _load_model(args.model)
    spec = _load_spec(args.spec, allow_transvars=True)
    value = truth_value(model, spec.expression, window_cap=args.window_cap)
    sys.stdout.write(f"{value:.12g}\n")
    return EXIT_OK


_METHODS = {
    "mc-pointwise": lambda t, d, s2, tau: ci_mc_pointwise(t, d, s2),
    "mc-uniform": lambda t, d, s2, tau: ci_mc_uniform(t, d, s2),
    "poly-union": lambda t, d, s2, tau: naive_uniform_lift(d, t, "polynomial", s2),
    "exp-union": lambda t, d, s2, tau: naive_uniform_lift(d, t, "exponential", s2),
    "pomc-pointwise": lambda t, d, s2, tau: ci_pomc_pointwise(d, t, 1, 0.0, math.sqrt(s2), tau),
    "pomc-uniform": lambda t, d, s2, tau: ci_pomc_uniform(d, t, 1, 0.0, math.sqrt(s2), tau),
}


def _parse_t_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("--t-range must be start:stop:points")
    start, stop, points = int(parts[0]), int(parts[1]), int(parts[2])
    if start < 1 or stop < start or points < 1:
        raise ConfigError("--t-range values out of order")
    if points == 1:
        return [start]
    ratio = (stop / start) ** (1.0 / (points - 1))
    ts = sorted({max(1, round(start * ratio ** i)) for i in range(points)})
    return ts


def cmd_compare_bounds(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in _METHODS:
            raise ConfigError(f"unknown method {m!r}; available: {sorted(_METHODS)}")
    out = sys.stdout
    out.write("t," + ",".join(methods) + "\n")
    for t in _parse_t_range(args.t_range):
        row = [str(t)]
        for m in methods:
            row.append(repr(_METHODS[m](t, args.delta, args.sigma_sq, args.tau_mix)))
        out.write(",".join(row) + "\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiments.runners import run_named_experiment
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key] = value
    manifest = run_named_experiment(args.name, args.seed, args.out_dir, **overrides)
    sys.stdout.write(json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairmon",
        description="Statistical runtime monitors for fairness properties "
                    "of Markovian event streams.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("monitor", help="monitor an event stream")
    p.add_argument("--spec", required=True, help="specification file")
    p.add_argument("--model", help="model file (to derive --tau-mix)")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--mode", choices=["pointwise", "uniform"], default="pointwise")
    p.add_argument("--engine", choices=["mc", "pomc"], default="mc")
    p.add_argument("--tau-mix", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--intersect", action="store_true",
                   help="intersect successive verdicts (uniform mode only)")
    p.add_argument("--events", help="event file (default: stdin)")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("simulate", help="sample an observation stream")
    p.add_argument("--model", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", choices=["initial", "stationary"], default="initial")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("truth", help="exact model-based value of a property")
    p.add_argument("--model", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--window-cap", type=int, default=6)
    p.set_defaults(func=cmd_truth)

    p = sub.add_parser("compare-bounds", help="tabulate half-width formulas")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--sigma-sq", type=float, default=1.0)
    p.add_argument("--tau-mix", type=float, default=1.0)
    p.add_argument("--t-range", default="10:1000000:51")
    p.add_argument("--methods", default="mc-pointwise,mc-uniform,poly-union,exp-union")
    p.set_defaults(func=cmd_compare_bounds)

    p = sub.add_parser("experiment", help="run a named experiment")
    p.add_argument("--name", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override an experiment parameter")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FairmonError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
