"""Command-line front end: ``layergreen <command> [options]``.

Commands
--------
eval            u and grad u at one or more points ``--x`` for a source ``--y``.
                CSV columns: x1,x2,x3,y1,y2,y3,u,du1,du2,du3
trace           u for a source on the interface at ``--y-hat``.
                CSV columns: x1,x2,x3,y1,y2,u
verify          invariant suite; ``--inject-fault`` flips the image sign.
                CSV columns: check,passed
oracle-compare  ``--spectral`` and/or ``--fd`` comparison with the closed form.
                CSV columns: oracle,case,error
experiments     ``--curved`` (CSV: scale,error) or ``--blowup`` (CSV: d,I).
export-grid     closed-form, FD or error field on a grid as CSV
                (x1,x2,x3,value), JSON, or raw float64 (``--format bin``,
                needs ``--output``; a ``.json`` sidecar is written next to it).

Settings come from built-in defaults, then ``--config FILE`` (a JSON object
whose keys are the long option names with ``_`` for ``-``), then explicit
flags.  Only the artifact goes to standard output or ``--output``;
diagnostics go to standard error.

Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 non-convergence.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .exceptions import NonConvergenceError
from .fd import BoxGrid, compare_to_closed_form
from .inverse import ProbeConfig, blowup_exponent
from .io import (SCHEMA_VERSION, dumps_csv, dumps_json, grid_sidecar, grid_to_csv,
                 write_grid_binary)
from .local_frame import SurfaceGraph, asymptotic_error_experiment
from .medium import LayeredMedium, Side, green_gradient, green_value, interface_trace
from .quadrature import QuadratureSpec
from .spectral import hankel_invert
from .verification import run_suite

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_NONCONVERGENCE = 0, 1, 2, 3

COMMON_DEFAULTS = {"a_plus": 2.0, "a_minus": 1.0, "output": None, "format": "json"}

DEFAULTS = {
    "eval": {"x": [[0.0, 0.0, 2.0]], "y": [0.0, 0.0, 1.0], "side": None},
    "trace": {"x": [[0.0, 0.0, 1.0]], "y_hat": [0.0, 0.0]},
    "verify": {"seed": 0, "pairs": 1000, "inject_fault": False},
    "oracle-compare": {"spectral": False, "fd": False, "pairs": 50, "seed": 0,
                       "nu_max": None, "tol": None, "threshold": None,
                       "grid_n": [33, 65], "box_l": 2.0, "y": [0.0, 0.0, 0.5]},
    "experiments": {"names": [], "curved": False, "blowup": False, "curvature_radius": 5.0,
                    "scales": [0.4, 0.2, 0.1], "grid_n": [65], "tol": 1e-10,
                    "s_hat": [0.0, 0.0], "a2_plus": 1.5, "a2_minus": 1.0, "v": 0.5,
                    "distances": [0.2, 0.1, 0.05, 0.025], "resolution": 16},
    "export-grid": {"field": "closed_form", "grid_n": [33], "box_l": 2.0,
                    "y": [0.0, 0.0, 0.5], "tol": 1e-8},
}


class InputError(ValueError):
    """Invalid configuration or command-line input."""


class CheckFailed(Exception):
    """Raised with the finished artifact when a verification check fails."""

    def __init__(self, artifact):
        super().__init__("check failed")
        self.artifact = artifact


def _floats(text, length=None):
    try:
        vals = [float(v) for v in str(text).replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers, got %r" % text)
    if length is not None and len(vals) != length:
        raise argparse.ArgumentTypeError("expected %d numbers, got %r" % (length, text))
    return vals


def _vec3(text):
    return _floats(text, 3)


def _vec2(text):
    return _floats(text, 2)


def _ints(text):
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError("expected integers, got %r" % text)
    return [int(v) for v in vals]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a-plus", type=float, help="coefficient above x3 = 0 (default 2)")
    common.add_argument("--a-minus", type=float, help="coefficient below x3 = 0 (default 1)")
    common.add_argument("--config", help="JSON file with settings; flags override it")
    common.add_argument("--output", help="write the artifact here instead of stdout")
    common.add_argument("--format", choices=["json", "csv", "bin"], help="artifact format")

    parser = argparse.ArgumentParser(prog="layergreen", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate u and grad u")
    p.add_argument("--x", type=_vec3, action="append", help="evaluation point; repeatable")
    p.add_argument("--y", type=_vec3, help="source point")
    p.add_argument("--side", choices=["plus", "minus"],
                   help="one-sided gradient for points on the interface")

    p = sub.add_parser("trace", parents=[common], help="source on the interface")
    p.add_argument("--x", type=_vec3, action="append", help="evaluation point; repeatable")
    p.add_argument("--y-hat", type=_vec2, help="horizontal source position")

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--seed", type=int)
    p.add_argument("--pairs", type=int, help="reciprocity sample size")
    p.add_argument("--inject-fault", action="store_const", const=True,
                   help="flip the sign of the image term (mutation test)")

    p = sub.add_parser("oracle-compare", parents=[common], help="compare with the oracles")
    p.add_argument("--spectral", action="store_const", const=True)
    p.add_argument("--fd", action="store_const", const=True)
    p.add_argument("--pairs", type=int, help="number of random pairs (spectral)")
    p.add_argument("--seed", type=int)
    p.add_argument("--nu-max", type=float, help="spectral truncation point")
    p.add_argument("--tol", type=float, help="quadrature rel_tol or CG tolerance")
    p.add_argument("--threshold", type=float, help="pass/fail error level")
    p.add_argument("--grid-n", type=_ints, help="comma-separated odd node counts (fd)")
    p.add_argument("--box-l", type=float, help="box half-width (fd)")
    p.add_argument("--y", type=_vec3, help="source point (fd)")

    p = sub.add_parser("experiments", parents=[common], help="curved / blow-up experiments")
    p.add_argument("names", nargs="*", metavar="NAME",
                   help="experiment names (curved, blowup); same as the flags")
    p.add_argument("--curved", action="store_const", const=True)
    p.add_argument("--blowup", action="store_const", const=True)
    p.add_argument("--curvature-radius", type=float)
    p.add_argument("--scales", type=_floats)
    p.add_argument("--grid-n", type=_ints)
    p.add_argument("--tol", type=float)
    p.add_argument("--s-hat", type=_vec2)
    p.add_argument("--a2-plus", type=float, help="second configuration (blowup)")
    p.add_argument("--a2-minus", type=float)
    p.add_argument("--v", type=float, help="coefficient difference on the box (blowup)")
    p.add_argument("--distances", type=_floats)
    p.add_argument("--resolution", type=int)

    p = sub.add_parser("export-grid", parents=[common], help="export a grid field")
    p.add_argument("--field", choices=["closed_form", "fd", "error"])
    p.add_argument("--grid-n", type=_ints)
    p.add_argument("--box-l", type=float)
    p.add_argument("--y", type=_vec3)
    p.add_argument("--tol", type=float)
    return parser


def resolve_config(args):
    """Merge defaults, the ``--config`` file and explicit flags (in that order)."""
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError("cannot read config %s: %s" % (args.config, exc))
        if not isinstance(loaded, dict):
            raise InputError("config must be a JSON object")
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key not in cfg:
                raise InputError("unknown setting %r for command %s" % (key, args.command))
            cfg[key] = value
    for key, value in vars(args).items():
        if key in cfg and value is not None:
            cfg[key] = value
    return cfg


def _medium(cfg, prefix="a"):
    try:
        return LayeredMedium(cfg[prefix + "_plus"], cfg[prefix + "_minus"])
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc))


def _points(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 3 or not np.all(np.isfinite(arr)):
        raise InputError("%s must be a list of finite 3-vectors" % name)
    return arr


def _vector(value, name, length):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (length,) or not np.all(np.isfinite(arr)):
        raise InputError("%s must be %d finite numbers" % (name, length))
    return arr


def _header(command, cfg, medium):
    return {"schema_version": SCHEMA_VERSION, "command": command,
            "medium": {"a_plus": medium.a_plus, "a_minus": medium.a_minus, "b": medium.b}}


def cmd_eval(cfg):
    medium = _medium(cfg)
    xs = _points(cfg["x"], "x")
    y = _vector(cfg["y"], "y", 3)
    side = {"plus": Side.PLUS, "minus": Side.MINUS, None: None}[cfg["side"]]
    records = []
    for x in xs:
        records.append({"x": x, "y": y, "u": green_value(medium, x, y),
                        "grad": green_gradient(medium, x, y, side=side)})
    if cfg["format"] == "csv":
        rows = [list(r["x"]) + list(r["y"]) + [r["u"]] + list(r["grad"]) for r in records]
        return dumps_csv(["x1", "x2", "x3", "y1", "y2", "y3", "u", "du1", "du2", "du3"], rows)
    out = _header("eval", cfg, medium)
    out["records"] = records
    return dumps_json(out)


def cmd_trace(cfg):
    medium = _medium(cfg)
    xs = _points(cfg["x"], "x")
    y_hat = _vector(cfg["y_hat"], "y_hat", 2)
    records = [{"x": x, "y_hat": y_hat, "u": interface_trace(medium, x, y_hat)} for x in xs]
    if cfg["format"] == "csv":
        rows = [list(r["x"]) + list(r["y_hat"]) + [r["u"]] for r in records]
        return dumps_csv(["x1", "x2", "x3", "y1", "y2", "u"], rows)
    out = _header("trace", cfg, medium)
    out["records"] = records
    return dumps_json(out)


def cmd_verify(cfg):
    medium = _medium(cfg)
    if int(cfg["pairs"]) < 1:
        raise InputError("pairs must be positive")
    passed, results = run_suite(medium, seed=int(cfg["seed"]),
                                inject_fault=bool(cfg["inject_fault"]), pairs=int(cfg["pairs"]))
    if cfg["format"] == "csv":
        text = dumps_csv(["check", "passed"], [[r.name, r.passed] for r in results])
    else:
        out = _header("verify", cfg, medium)
        out.update({"seed": int(cfg["seed"]), "inject_fault": bool(cfg["inject_fault"]),
                    "b_zero_fast_path": medium.b == 0.0, "passed": passed,
                    "checks": [r.as_dict() for r in results]})
        text = dumps_json(out)
    if not passed:
        raise CheckFailed(text)
    return text


def sample_spectral_pairs(rng, count):
    """Random pairs with |x3|+|y3| >= 0.1, rho <= 10, |x - y| >= 0.05 and y3 != 0."""
    pairs = []
    while len(pairs) < count:
        x = rng.uniform(-3.0, 3.0, size=3)
        y = rng.uniform(-3.0, 3.0, size=3)
        if (abs(x[2]) + abs(y[2]) >= 0.1 and abs(y[2]) > 1e-3 and np.linalg.norm(x - y) >= 0.05
                and np.hypot(*(x - y)[:2]) <= 10.0):
            pairs.append((x, y))
    return pairs


def _spectral_compare(medium, cfg):
    quad = QuadratureSpec(nu_max=cfg["nu_max"], rel_tol=cfg["tol"] or 1e-10)
    threshold = cfg["threshold"] or 1e-6
    rng = np.random.default_rng(int(cfg["seed"]))
    errors, failure = [], None
    for x, y in sample_spectral_pairs(rng, int(cfg["pairs"])):
        try:
            u_s = hankel_invert(medium, x, y, quad)
        except NonConvergenceError as exc:
            failure = str(exc)
            break
        u = green_value(medium, x, y)
        errors.append(abs(u_s - u) / u)
    report = {"pairs_requested": int(cfg["pairs"]), "pairs_done": len(errors),
              "max_rel_error": max(errors) if errors else None,
              "mean_rel_error": float(np.mean(errors)) if errors else None,
              "threshold": threshold, "errors": errors}
    report["passed"] = failure is None and bool(errors) and max(errors) <= threshold
    return report, failure


def _fd_compare(medium, cfg):
    threshold = cfg["threshold"] or 0.02
    y = _vector(cfg["y"], "y", 3)
    rows, failure = [], None
    for n in cfg["grid_n"]:
        try:
            grid = BoxGrid(float(cfg["box_l"]), int(n))
        except ValueError as exc:
            raise InputError(str(exc))
        try:
            rep = compare_to_closed_form(medium, grid, y, tol=cfg["tol"] or 1e-8)
        except NonConvergenceError as exc:
            failure = str(exc)
            break
        row = {"n": int(n), "h": grid.h}
        row.update(rep.as_dict())
        rows.append(row)
    errs = [r["rel_l2_error"] for r in rows]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    report = {"box_l": float(cfg["box_l"]), "y": y, "threshold": threshold, "grids": rows,
              "decreasing": decreasing}
    report["passed"] = failure is None and bool(rows) and errs[-1] <= threshold and decreasing
    return report, failure


def cmd_oracle_compare(cfg):
    medium = _medium(cfg)
    if not (cfg["spectral"] or cfg["fd"]):
        raise InputError("choose --spectral and/or --fd")
    out = _header("oracle-compare", cfg, medium)
    failure = None
    rows = []
    if cfg["spectral"]:
        out["spectral"], failure = _spectral_compare(medium, cfg)
        rows += [["spectral", i, e] for i, e in enumerate(out["spectral"]["errors"])]
    if cfg["fd"] and failure is None:
        out["fd"], failure = _fd_compare(medium, cfg)
        rows += [["fd", g["n"], g["rel_l2_error"]] for g in out["fd"]["grids"]]
    out["passed"] = failure is None and all(out[k]["passed"] for k in ("spectral", "fd")
                                            if k in out)
    if failure is not None:
        out["nonconvergence"] = failure
    text = (dumps_csv(["oracle", "case", "error"], rows) if cfg["format"] == "csv"
            else dumps_json(out))
    if failure is not None:
        raise NonConvergenceError(failure, value=text)
    if not out["passed"]:
        raise CheckFailed(text)
    return text


def _curved(medium, cfg):
    surface = SurfaceGraph.paraboloid(float(cfg["curvature_radius"]))
    n = int(cfg["grid_n"][0])
    s_hat = _vector(cfg["s_hat"], "s_hat", 2)
    table = asymptotic_error_experiment(medium, surface, s_hat, cfg["scales"], n=n,
                                        tol=float(cfg["tol"]))
    control = asymptotic_error_experiment(medium, SurfaceGraph.flat(), s_hat, cfg["scales"],
                                          n=n, tol=float(cfg["tol"]))
    errs = table.errors()
    monotone = bool(np.all(np.isfinite(errs)) and np.all(np.diff(errs) < 0))
    report = {"curvature_radius": float(cfg["curvature_radius"]), "s_hat": s_hat,
              "table": table.as_dict(), "flat_control": control.as_dict(),
              "strictly_decreasing": monotone}
    report["passed"] = monotone and bool(np.all(control.errors() <= 1e-10))
    rows = [[r.scale, r.relative_error] for r in table.rows]
    return report, rows


def _blowup(medium, cfg):
    medium2 = _medium(cfg, "a2")
    config = ProbeConfig(distances=tuple(cfg["distances"]), v=cfg["v"],
                         resolution=int(cfg["resolution"]))
    fit = blowup_exponent(config, medium, medium2)
    report = {"medium2": {"a_plus": medium2.a_plus, "a_minus": medium2.a_minus},
              "box": {"lo": config.lo, "hi": config.hi}, "v": config.contrast_on_box(medium,
                                                                                     medium2),
              "fit": fit.as_dict()}
    if fit.trivial:
        report["passed"] = all(v == 0.0 for v in fit.values)
    else:
        report["passed"] = (fit.consistent and fit.exponent is not None
                            and -1.3 <= fit.exponent <= -0.7)
    return report, [[d, v] for d, v in zip(fit.distances, fit.values)]


def cmd_experiments(cfg):
    medium = _medium(cfg)
    unknown = sorted(set(cfg.get("names") or []) - {"curved", "blowup"})
    if unknown:
        raise InputError("unknown experiment name(s): %s" % ", ".join(unknown))
    chosen = [k for k in ("curved", "blowup") if cfg[k] or k in (cfg.get("names") or [])]
    if not chosen:
        raise InputError("choose --curved and/or --blowup")
    if cfg["format"] == "csv" and len(chosen) > 1:
        raise InputError("CSV output holds one experiment; pick --curved or --blowup")
    out = _header("experiments", cfg, medium)
    rows = None
    for name in chosen:
        try:
            out[name], rows = (_curved if name == "curved" else _blowup)(medium, cfg)
        except ValueError as exc:
            raise InputError(str(exc))
    passed = all(out[k]["passed"] for k in chosen)
    out["passed"] = passed
    if cfg["format"] == "csv":
        header = ["scale", "error"] if chosen[0] == "curved" else ["d", "I"]
        text = dumps_csv(header, rows)
    else:
        text = dumps_json(out)
    if not passed:
        raise CheckFailed(text)
    return text


def cmd_export_grid(cfg):
    medium = _medium(cfg)
    y = _vector(cfg["y"], "y", 3)
    try:
        grid = BoxGrid(float(cfg["box_l"]), int(cfg["grid_n"][0]))
    except ValueError as exc:
        raise InputError(str(exc))
    nodes = grid.nodes()
    exact = np.full(grid.shape, np.nan)
    away = np.linalg.norm(nodes - y, axis=-1) > 0.0
    exact[away] = green_value(medium, nodes[away], y)
    if cfg["field"] == "closed_form":
        values = exact
    else:
        _, u = compare_to_closed_form(medium, grid, y, tol=float(cfg["tol"]), return_field=True)
        values = u if cfg["field"] == "fd" else u - exact
    if cfg["format"] == "bin":
        if not cfg["output"]:
            raise InputError("--format bin needs --output")
        write_grid_binary(cfg["output"], grid, values, kind=cfg["field"])
        return None
    if cfg["format"] == "csv":
        return grid_to_csv(grid, values)
    out = _header("export-grid", cfg, medium)
    out.update({"grid": grid_sidecar(grid, cfg["field"]), "values": values.ravel()})
    return dumps_json(out)


COMMANDS = {"eval": cmd_eval, "trace": cmd_trace, "verify": cmd_verify,
            "oracle-compare": cmd_oracle_compare, "experiments": cmd_experiments,
            "export-grid": cmd_export_grid}


def _emit(text, path, stdout):
    if text is None:
        return
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    cfg = {"output": None}
    try:
        cfg = resolve_config(args)
        if cfg["format"] == "bin" and args.command != "export-grid":
            raise InputError("--format bin is only available for export-grid")
        text = COMMANDS[args.command](cfg)
        _emit(text, cfg["output"], stdout)
        return EXIT_OK
    except CheckFailed as exc:
        _emit(exc.artifact, cfg["output"], stdout)
        print("layergreen: one or more checks failed", file=stderr)
        return EXIT_CHECK
    except NonConvergenceError as exc:
        if isinstance(exc.value, str):
            _emit(exc.value, cfg["output"], stdout)
        print("layergreen: non-convergence: %s" % exc, file=stderr)
        return EXIT_NONCONVERGENCE
    except InputError as exc:
        usage = parser._subparsers._group_actions[0].choices[args.command].format_usage()
        stderr.write(usage)
        print("layergreen %s: error: %s" % (args.command, exc), file=stderr)
        return EXIT_INPUT
    except BrokenPipeError:
        # downstream reader closed early (e.g. ``| head``); drop the rest quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (ValueError, TypeError, KeyError) as exc:
        print("layergreen: error: %s" % exc, file=stderr)
        return EXIT_INPUT
