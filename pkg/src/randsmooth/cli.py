"""Command-line harness: ``estimate``, ``sweep``, ``optimize`` and ``validate``.

Every option may also come from a JSON file given with ``--config``; its keys
are the long flag names without the leading dashes (``"step-size": 0.5``).
Flags override file values.  Output is CSV on stdout, also written to
``--output`` when given.  Lines starting with ``#`` are comments and carry
everything that may differ between identical runs (wall-clock timings).

Exit codes: 0 success, 1 numeric failure or failed validation, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import noise, oracle
from .estimators import (
    GRADIENT_ESTIMATORS,
    EstimatorError,
    SmoothingConfig,
    UnsupportedEstimatorError,
    smoothed_value,
)
from .optimize import GRAD_SOURCES, DescentConfig, DivergenceError, check_source, run_descent
from .problems import Objective, ProblemSpecError, constant, make_analytic, make_problem

__all__ = ["main", "SpecError", "ESTIMATORS", "estimate_header", "optimize_header"]

ESTIMATORS = ("value", *GRADIENT_ESTIMATORS)
SWEEP_AXES = ("epsilon", "samples", "x")


class SpecError(ValueError):
    """An option failed validation; ``field`` names the offending flag."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"--{field}: {message}")


# ---------------------------------------------------------------------------
# option parsing shared by flags and JSON config

def _float(text) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _positive(text) -> float:
    v = _float(text)
    if v <= 0:
        raise ValueError("must be positive")
    return v


def _nonneg(text) -> float:
    v = _float(text)
    if v < 0:
        raise ValueError("must be nonnegative")
    return v


def _posint(text) -> int:
    v = float(text)
    if v != int(v) or v < 1:
        raise ValueError("must be a positive integer")
    return int(v)


def _int(text) -> int:
    return int(str(text), 0)


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = [p for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    return [_float(p) for p in parts]


def _ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [_int(v) for v in text]
    return [_int(p) for p in str(text).split(",") if p.strip()]


def _choice(options) -> Callable[[Any], str]:
    def parse(text):
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return parse


def _linspace(text) -> list[float]:
    parts = _floats(text)
    if len(parts) != 3 or parts[2] != int(parts[2]) or parts[2] < 1:
        raise ValueError("expected START,STOP,NUM")
    return [float(v) for v in np.linspace(parts[0], parts[1], int(parts[2]))]


def _boolean(text) -> bool:
    if isinstance(text, bool):
        return text
    raise ValueError("must be true or false")


@dataclass(frozen=True)
class Option:
    name: str
    parse: Callable[[Any], Any]
    default: Any = None
    help: str = ""
    flag: bool = False  # boolean switch


COMMON = [
    Option("seed", _int, 0, "base random seed (64-bit)"),
    Option("output", str, None, "also write the CSV to this path"),
    Option("workers", _posint, 1, "worker threads; results do not depend on it"),
]

SMOOTHING = [
    Option("problem", str, None, "problem descriptor, e.g. edge:N=32,target=0.8"),
    Option("epsilon", _positive, 0.1, "noise scale"),
    Option("samples", _posint, 1000, "Monte-Carlo samples per estimate"),
    Option("dist", _choice(tuple(k.value for k in noise.Kind)), "gaussian", "smoothing distribution"),
]

COMMANDS: dict[str, list[Option]] = {
    "estimate": COMMON
    + SMOOTHING
    + [
        Option("x", _floats, None, "query point, comma-separated"),
        Option("estimator", _choice(ESTIMATORS), "zeroth"),
        Option("timing", _boolean, False, "record wall_ms in the CSV body (breaks byte-identity)", True),
    ],
    "sweep": COMMON
    + SMOOTHING
    + [
        Option("x", _floats, None, "query point, comma-separated"),
        Option("estimator", _choice(ESTIMATORS), "zeroth"),
        Option("axis", _choice(SWEEP_AXES), None, "the single swept parameter"),
        Option("grid", _floats, None, "explicit grid values, comma-separated"),
        Option("linspace", _linspace, None, "grid as START,STOP,NUM"),
        Option("seeds", _ints, None, "seeds to repeat each grid point with (default: --seed)"),
        Option("timing", _boolean, False, "record wall_ms in the CSV body (breaks byte-identity)", True),
    ],
    "optimize": COMMON
    + SMOOTHING
    + [
        Option("x0", _floats, None, "starting point, comma-separated"),
        Option("grad-source", _choice(GRAD_SOURCES), "raw"),
        Option("step-size", _positive, 0.1),
        Option("max-iters", _posint, 100),
        Option("stop-tol", _nonneg, 0.0, "stop once the estimated gradient norm is below this"),
        Option("reseed-per-iter", _boolean, True, "fresh noise at every iteration", True),
    ],
    "validate": COMMON
    + [
        Option("problem", _choice((*oracle.CLOSED_FORMS, "quadratic")), None,
               "restrict the closed-form checks to one problem"),
        Option("nodes", _posint, 10001, "quadrature abscissae (odd, >= 101)"),
        Option("half-width", _positive, 8.0, "quadrature truncation in noise units"),
        Option("tol", _positive, 1e-6, "agreement tolerance"),
        Option("samples", _posint, 100000, "samples for the score-identity check"),
    ],
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randsmooth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, options in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=argparse.SUPPRESS, help="JSON file of option values")
        for opt in options:
            dest = opt.name.replace("-", "_")
            if opt.flag:
                p.add_argument(f"--{opt.name}", dest=dest, action=argparse.BooleanOptionalAction,
                               default=argparse.SUPPRESS, help=opt.help)
            else:
                p.add_argument(f"--{opt.name}", dest=dest, default=argparse.SUPPRESS, help=opt.help)
    return parser


def resolve(command: str, flags: dict[str, Any], config: dict[str, Any] | None = None) -> dict[str, Any]:
    """Merge defaults < config file < flags and parse every field."""
    options = {o.name: o for o in COMMANDS[command]}
    merged: dict[str, Any] = {}
    for key, value in (config or {}).items():
        if key not in options:
            raise SpecError(key, "unknown option in config file")
        merged[key] = value
    for dest, value in flags.items():
        merged[dest.replace("_", "-")] = value
    out = {}
    for name, opt in options.items():
        if name not in merged or merged[name] is None:
            out[name] = opt.default
            continue
        raw = merged[name]
        if isinstance(raw, bool) and not opt.flag:
            raise SpecError(name, "expected a value, not a boolean")
        try:
            out[name] = opt.parse(raw)
        except (TypeError, ValueError) as exc:
            raise SpecError(name, str(exc) or "invalid value") from None
    return out


def _load_config(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError("config", f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict):
        raise SpecError("config", "top level must be a JSON object")
    return data


# ---------------------------------------------------------------------------
# CSV helpers

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def estimate_header(dim: int, width: int) -> list[str]:
    """``problem,x0..,estimator,epsilon,samples,seed,mean0..,stderr0..,wall_ms``."""
    return (
        ["problem", *(f"x{i}" for i in range(dim)), "estimator", "epsilon", "samples", "seed"]
        + [f"mean{i}" for i in range(width)]
        + [f"stderr{i}" for i in range(width)]
        + ["wall_ms"]
    )


def optimize_header(dim: int) -> list[str]:
    return ["iter", *(f"x{i}" for i in range(dim)), "value", "grad_norm"]


def _emit(text: str, output: str | None, stdout) -> None:
    stdout.write(text)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header, rows, comments=()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    for line in comments:
        buf.write(f"# {line}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands

def _problem(opts) -> Objective:
    if not opts["problem"]:
        raise SpecError("problem", "required")
    try:
        return make_problem(opts["problem"])
    except ProblemSpecError as exc:
        raise SpecError("problem", str(exc)) from None


def _point(opts, key, g: Objective) -> np.ndarray:
    if opts[key] is None:
        raise SpecError(key, "required")
    x = np.array(opts[key], dtype=np.float64)
    if x.size != g.dim:
        raise SpecError(key, f"has {x.size} coordinates but {g.name} is {g.dim}-dimensional")
    return x


def _smoothing(opts, dim, epsilon=None, samples=None, seed=None) -> SmoothingConfig:
    return SmoothingConfig(
        opts["epsilon"] if epsilon is None else epsilon,
        opts["samples"] if samples is None else samples,
        noise.NoiseDistribution(opts["dist"], dim),
        opts["seed"] if seed is None else seed,
    )


def _check_estimator(g: Objective, estimator: str) -> None:
    if estimator == "first" and not g.has_gradient:
        raise SpecError("estimator", f"{g.name} exposes no gradient oracle; 'first' is unavailable")


def _estimate_row(problem: str, g, x, estimator, cfg, workers):
    t0 = time.perf_counter()
    if estimator == "value":
        est = smoothed_value(g, x, cfg, workers=workers)
        mean, stderr = [est.mean], [est.stderr]
    else:
        est = GRADIENT_ESTIMATORS[estimator](g, x, cfg, workers=workers)
        mean, stderr = list(est.mean), list(est.stderr)
    ms = 1e3 * (time.perf_counter() - t0)
    row = [problem, *x, estimator, cfg.epsilon, cfg.samples, cfg.seed, *mean, *stderr]
    return row, ms


def _finish_rows(rows_ms, timing):
    rows = [row + [ms if timing else math.nan] for row, ms in rows_ms]
    comments = [] if timing else [f"wall_ms row={i} {ms:.3f}" for i, (_, ms) in enumerate(rows_ms)]
    return rows, comments


def cmd_estimate(opts, stdout) -> int:
    g = _problem(opts)
    x = _point(opts, "x", g)
    _check_estimator(g, opts["estimator"])
    cfg = _smoothing(opts, g.dim)
    row_ms = _estimate_row(opts["problem"], g, x, opts["estimator"], cfg, opts["workers"])
    rows, comments = _finish_rows([row_ms], opts["timing"])
    width = 1 if opts["estimator"] == "value" else g.dim
    _emit(_csv_text(estimate_header(g.dim, width), rows, comments), opts["output"], stdout)
    return 0


def cmd_sweep(opts, stdout) -> int:
    g = _problem(opts)
    x = _point(opts, "x", g)
    _check_estimator(g, opts["estimator"])
    axis = opts["axis"]
    if axis is None:
        raise SpecError("axis", "required (one of epsilon, samples, x)")
    if (opts["grid"] is None) == (opts["linspace"] is None):
        raise SpecError("grid", "give exactly one of --grid or --linspace")
    grid = opts["grid"] if opts["grid"] is not None else opts["linspace"]
    if axis == "epsilon" and min(grid) <= 0:
        raise SpecError("grid", "epsilon values must be positive")
    if axis == "samples":
        try:
            grid = [_posint(v) for v in grid]
        except ValueError:
            raise SpecError("grid", "samples values must be positive integers") from None
    if axis == "x" and g.dim != 1:
        raise SpecError("axis", "an x sweep needs a one-dimensional problem")
    seeds = opts["seeds"] if opts["seeds"] else [opts["seed"]]

    tasks = []
    for v in grid:
        for s in seeds:
            xi = np.array([v]) if axis == "x" else x
            cfg = _smoothing(
                opts,
                g.dim,
                epsilon=v if axis == "epsilon" else None,
                samples=v if axis == "samples" else None,
                seed=s,
            )
            tasks.append((xi, cfg))

    def run(task):
        return _estimate_row(opts["problem"], g, task[0], opts["estimator"], task[1], 1)

    if opts["workers"] > 1:
        with ThreadPoolExecutor(max_workers=opts["workers"]) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    rows, comments = _finish_rows(results, opts["timing"])
    width = 1 if opts["estimator"] == "value" else g.dim
    _emit(_csv_text(estimate_header(g.dim, width), rows, comments), opts["output"], stdout)
    return 0


def cmd_optimize(opts, stdout) -> int:
    g = _problem(opts)
    x0 = _point(opts, "x0", g)
    source = opts["grad-source"]
    try:
        check_source(g, source)
    except UnsupportedEstimatorError as exc:
        raise SpecError("grad-source", str(exc)) from None
    cfg = DescentConfig(
        opts["step-size"],
        opts["max-iters"],
        source,
        None if source == "raw" else _smoothing(opts, g.dim),
        opts["stop-tol"],
        opts["reseed-per-iter"],
    )
    try:
        traj = run_descent(g, x0, cfg, workers=opts["workers"])
    except DivergenceError as exc:
        rows = [[it.iteration, *it.x, it.value, it.grad_norm] for it in exc.trajectory.iterates]
        text = _csv_text(optimize_header(g.dim), rows, [f"error: {exc}"])
        _emit(text, opts["output"], stdout)
        raise
    rows = [[it.iteration, *it.x, it.value, it.grad_norm] for it in traj.iterates]
    summary = f"final_value={_fmt(traj.final.value)} terminated_by={traj.terminated_by}"
    _emit(_csv_text(optimize_header(g.dim), rows, [summary]), opts["output"], stdout)
    return 0


_VALIDATE_PROBLEMS = {
    "heaviside": lambda: make_analytic("heaviside"),
    "relu": lambda: make_analytic("relu"),
    "abs": lambda: make_analytic("abs"),
    "quadratic1d": lambda: make_analytic("quadratic", 1),
    "constant": lambda: constant(1.0),
}
VALIDATE_GRID = [(float(x), e) for x in np.linspace(-2.0, 2.0, 10) for e in (0.1, 0.3, 0.5, 1.0, 2.0)]


def validation_checks(
    problems, rule: oracle.QuadratureRule, tol: float, samples: int, seed: int
) -> list[tuple[str, float, float]]:
    """Run the oracle agreement and score checks; returns ``(name, max_error, tolerance)``."""
    checks = []
    for name in problems:
        g = _VALIDATE_PROBLEMS[name]()
        ev = eg = ed = 0.0
        for x, e in VALIDATE_GRID:
            v, d = oracle.closed_form(name, x, e)
            qv = oracle.quad_smoothed_value(g, x, e, rule)
            qg = oracle.quad_smoothed_grad(g, x, e, rule)
            h = 1e-5
            fd = (oracle.quad_smoothed_value(g, x + h, e, rule) - oracle.quad_smoothed_value(g, x - h, e, rule)) / (2 * h)
            ev, eg, ed = max(ev, abs(v - qv)), max(eg, abs(d - qg)), max(ed, abs(fd - qg))
        checks.append((f"closed_form_vs_quadrature_value[{name}]", ev, tol))
        checks.append((f"closed_form_vs_quadrature_grad[{name}]", eg, tol))
        checks.append((f"quadrature_grad_vs_finite_diff[{name}]", ed, tol))

    pts = np.random.default_rng(seed).uniform(-4.0, 4.0, size=(100, 3))
    for kind in noise.Kind:
        dist = noise.NoiseDistribution(kind, 3)
        h = 1e-5
        err = 0.0
        for z in pts:
            fd = [
                (noise.log_density(dist, z + h * e) - noise.log_density(dist, z - h * e)) / (2 * h)
                for e in np.eye(3)
            ]
            err = max(err, float(np.max(np.abs(noise.score(dist, z) - fd))))
        checks.append((f"score_vs_finite_diff[{kind.value}]", err, tol))
        zs = noise.sample_block(dist, seed, 1, samples)
        m = float(np.max(np.abs(np.mean(noise.score(dist, zs), axis=0))))
        checks.append((f"score_mean_zero[{kind.value}]", m, 4.0 / math.sqrt(samples)))
    return checks


def cmd_validate(opts, stdout) -> int:
    try:
        rule = oracle.QuadratureRule(opts["nodes"], opts["half-width"])
    except ValueError as exc:
        raise SpecError("nodes", str(exc)) from None
    name = opts["problem"]
    if name == "quadratic":
        name = "quadratic1d"
    problems = [name] if name else ["heaviside", "relu", "abs", "quadratic1d"]
    checks = validation_checks(problems, rule, opts["tol"], opts["samples"], opts["seed"])
    rows = [[c, "pass" if err <= t else "fail", err, t] for c, err, t in checks]
    _emit(_csv_text(["check", "status", "max_error", "tolerance"], rows), opts["output"], stdout)
    return 0 if all(r[1] == "pass" for r in rows) else 1


_HANDLERS = {"estimate": cmd_estimate, "sweep": cmd_sweep, "optimize": cmd_optimize, "validate": cmd_validate}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = vars(ns)
    command = flags.pop("command")
    try:
        config = _load_config(flags.pop("config")) if "config" in flags else None
        opts = resolve(command, flags, config)
        return _run(command, opts, stdout)
    except SpecError as exc:
        print(f"randsmooth {command}: error: {exc}", file=stderr)
        return 2
    except (EstimatorError, oracle.OracleError, ArithmeticError) as exc:
        print(f"randsmooth {command}: numeric error: {exc}", file=stderr)
        return 1


def _run(command, opts, stdout) -> int:
    try:
        return _HANDLERS[command](opts, stdout)
    except ValueError as exc:
        if isinstance(exc, (SpecError, EstimatorError)):
            raise
        raise SpecError(command, str(exc)) from None


if __name__ == "__main__":
    sys.exit(main())
